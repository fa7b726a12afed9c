"""Shared fixtures: small on-disk corpora and chunk builders."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from stylo.corpus import Chunk, Document, canonicalize, segment_chunks
from stylo.features import tokenize


def make_manifest(base: Path, docs: list[dict], min_chunk_words: int = 300) -> Path:
    """Write texts plus a manifest JSON; each doc dict needs id/text and
    optionally author/title/year/variant_tag."""
    base.mkdir(parents=True, exist_ok=True)
    entries = []
    for d in docs:
        path = base / f"{d['id']}.txt"
        path.write_text(d["text"], encoding="utf-8")
        entry = {"id": d["id"], "path": f"{d['id']}.txt"}
        for key in ("author", "title", "year", "variant_tag"):
            if key in d:
                entry[key] = d[key]
        entries.append(entry)
    manifest = base / "manifest.json"
    manifest.write_text(
        json.dumps({"min_chunk_words": min_chunk_words, "documents": entries}),
        encoding="utf-8",
    )
    return manifest


def make_chunks(doc_id: str, texts: list[str]) -> list[Chunk]:
    """One chunk per text, tokens via the corpus word definition."""
    out = []
    for i, text in enumerate(texts):
        toks = tokenize(text, f"{doc_id}:{i}").words()
        out.append(Chunk(doc_id=doc_id, index=i, tokens=toks,
                         word_count=len(toks), text=text))
    return out


def chunked_doc(doc_id: str, text: str, min_words: int = 300) -> list[Chunk]:
    doc = canonicalize(Document(id=doc_id, title=doc_id, raw_text=text))
    return segment_chunks(doc, min_words)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture()
def tiny_corpus(tmp_path: Path) -> Path:
    """Three labeled docs by two authors plus one unlabeled query."""
    word_a = "casa viento luz sombra camino "
    word_b = "mar barco sal puerto ola "
    docs = [
        {"id": "a1", "author": "ana", "title": "A one",
         "text": (word_a * 80) + "\n\n" + (word_a * 80)},
        {"id": "a2", "author": "ana", "title": "A two",
         "text": (word_a * 90) + "\n\n" + ("luz camino " * 30)},
        {"id": "b1", "author": "blas", "title": "B one", "year": 1554,
         "text": (word_b * 85) + "\n\n" + (word_b * 85)},
        {"id": "q", "title": "Query",
         "text": (word_a * 70) + "\n\n" + ("sombra casa " * 40)},
    ]
    return make_manifest(tmp_path / "corpus", docs, min_chunk_words=100)
