"""Corpus ingestion: raw texts with author labels, canonicalization of old
spellings and markup, paragraph-aligned chunking, author profiles, and
chunk-count rebalancing.
"""

from __future__ import annotations

import json
import math
import random
import re
import unicodedata
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

# A word is a maximal run of letters; apostrophes internal to a run are kept.
WORD_RE = re.compile(r"[^\W\d_]+(?:['’][^\W\d_]+)*")

HYPHEN_VARIANTS = "‐‑‒–—―−"

_LETTER = r"[^\W\d_]"


class CorpusError(Exception):
    """Base class for corpus-level failures."""


class MissingFileError(CorpusError):
    pass


class DuplicateIdError(CorpusError):
    pass


class EncodingError(CorpusError):
    pass


class EmptyDocumentError(CorpusError):
    pass


class UnlabeledDocumentError(CorpusError):
    pass


@dataclass
class Document:
    id: str
    title: str
    raw_text: str
    author: str | None = None
    year: int | None = None
    canonical_text: str | None = None
    variant_tag: str | None = None

    @property
    def is_query(self) -> bool:
        return self.author is None


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    path: str
    author: str | None = None
    title: str = ""
    year: int | None = None
    variant_tag: str | None = None


@dataclass(frozen=True)
class CorpusManifest:
    documents: tuple[ManifestEntry, ...]
    min_chunk_words: int = 300
    base_dir: Path = field(default_factory=Path)

    def __post_init__(self) -> None:
        if self.min_chunk_words < 1:
            raise CorpusError("min_chunk_words must be positive")
        if not any(e.author is not None for e in self.documents):
            raise CorpusError("manifest must contain at least one labeled document")


@dataclass
class Chunk:
    doc_id: str
    index: int
    tokens: list[str]
    word_count: int
    short_flag: bool = False
    text: str = ""


@dataclass
class AuthorProfile:
    author: str
    concatenated_text: str
    source_doc_ids: list[str]


@dataclass(frozen=True)
class CanonicalRules:
    """Configuration for the canonicalization pass.

    Margin/footnote annotations and Latin/Greek citations must be delimited in
    the source files; headers, chapter headings, and speaker tags are matched
    by line-level patterns. Abbreviation expansions should already be in
    canonical form, otherwise idempotence is not guaranteed.
    """

    annotation_delims: tuple[str, str] = ("[[", "]]")
    citation_delims: tuple[str, str] = ("{{", "}}")
    header_patterns: tuple[str, ...] = (
        r"^\s*[-=_*~·.]*\s*(?:p(?:ág(?:ina)?|age|g)?\.?\s*)?\d+\s*[-=_*~·.]*\s*$",
        r"^\s*[IVXLCDM]+[.\s]*$",
    )
    heading_keywords: tuple[str, ...] = (
        "capítulo",
        "capitulo",
        "tratado",
        "acto",
        "escena",
        "parte",
        "libro",
        "jornada",
    )
    abbreviations: Mapping[str, str] = field(default_factory=lambda: {"Ð": "DE"})
    play: bool = False

    @classmethod
    def with_abbreviation_file(cls, path: str | Path, **kwargs) -> "CanonicalRules":
        """Rules with the abbreviation table read from a JSON map file."""
        table = dict(json.loads(Path(path).read_text(encoding="utf-8")))
        table.setdefault("Ð", "DE")
        return cls(abbreviations=table, **kwargs)


def load_manifest(path: str | Path) -> CorpusManifest:
    """Parse a manifest JSON file; document paths resolve against its folder."""
    path = Path(path)
    data = json.loads(path.read_text(encoding="utf-8"))
    entries = []
    for raw in data.get("documents", []):
        entries.append(
            ManifestEntry(
                id=str(raw["id"]),
                path=str(raw["path"]),
                author=raw.get("author"),
                title=raw.get("title", ""),
                year=raw.get("year"),
                variant_tag=raw.get("variant_tag"),
            )
        )
    return CorpusManifest(
        documents=tuple(entries),
        min_chunk_words=int(data.get("min_chunk_words", 300)),
        base_dir=path.parent,
    )


def load_corpus(manifest: CorpusManifest) -> list[Document]:
    """Read every manifest entry into a Document, in manifest order."""
    seen: set[str] = set()
    docs: list[Document] = []
    for entry in manifest.documents:
        if entry.id in seen:
            raise DuplicateIdError(f"duplicate document id {entry.id!r} in manifest")
        seen.add(entry.id)
        file_path = Path(entry.path)
        if not file_path.is_absolute():
            file_path = manifest.base_dir / file_path
        if not file_path.is_file():
            raise MissingFileError(f"entry {entry.id!r}: file not found: {file_path}")
        try:
            raw = file_path.read_bytes().decode("utf-8")
        except UnicodeDecodeError as exc:
            raise EncodingError(f"entry {entry.id!r}: not valid UTF-8: {file_path} ({exc})") from None
        docs.append(
            Document(
                id=entry.id,
                title=entry.title,
                raw_text=raw,
                author=entry.author,
                year=entry.year,
                variant_tag=entry.variant_tag,
            )
        )
    return docs


def _strip_delimited(text: str, delims: tuple[str, str]) -> str:
    open_d, close_d = delims
    pattern = re.compile(re.escape(open_d) + r".*?" + re.escape(close_d), re.DOTALL)
    return pattern.sub("", text)


def _strip_matching_lines(text: str, patterns: Iterable[re.Pattern[str]]) -> str:
    lines = text.split("\n")
    kept = [ln for ln in lines if not any(p.match(ln) for p in patterns)]
    return "\n".join(kept)


def canonicalize(doc: Document, rules: CanonicalRules | None = None) -> Document:
    """Apply the spelling/markup regularization rules; sets canonical_text."""
    if not doc.raw_text:
        raise EmptyDocumentError(f"document {doc.id!r} has empty raw_text")
    rules = rules or CanonicalRules()
    text = doc.raw_text
    header_res = [re.compile(p) for p in rules.header_patterns]

    text = _strip_delimited(text, rules.annotation_delims)
    text = _strip_matching_lines(text, header_res)
    text = _strip_delimited(text, rules.citation_delims)

    # Join words split across line breaks, and words broken by dash variants
    # (OCR artifacts); plain in-line hyphens are legitimate compounds.
    text = re.sub(
        rf"(?<={_LETTER})[-{HYPHEN_VARIANTS}][ \t]*\n[ \t]*(?={_LETTER})", "", text
    )
    text = re.sub(rf"(?<={_LETTER})[{HYPHEN_VARIANTS}](?={_LETTER})", "", text)

    text = text.replace("\r\n", "\n").replace("\r", "\n").replace("\t", " ")
    text = "".join(
        ch for ch in text if ch == "\n" or unicodedata.category(ch) not in ("Cc", "Cf")
    )

    text = re.sub(r"([^\w\s])\1+", r"\1", text)
    text = re.sub(f"[{HYPHEN_VARIANTS}]", "-", text)
    text = re.sub(rf"(?<!{_LETTER})\d+(?!{_LETTER})", "", text)

    for abbr, expansion in sorted(rules.abbreviations.items()):
        text = re.sub(
            rf"(?<!{_LETTER}){re.escape(abbr)}(?!{_LETTER})", expansion, text
        )

    if rules.heading_keywords:
        alts = "|".join(re.escape(k) for k in rules.heading_keywords)
        heading = re.compile(
            rf"^\s*(?:{alts})\b[\s.:°ºIVXLCDM-]*$", re.IGNORECASE
        )
        text = _strip_matching_lines(text, [heading])

    if rules.play:
        speaker = re.compile(
            r"^[A-ZÁÉÍÓÚÑÜ]"
            r"[A-ZÁÉÍÓÚÑÜ ]{0,39}[.:][ \t]*"
        )
        text = "\n".join(speaker.sub("", ln) for ln in text.split("\n"))

    # the transformations above can leave a line that now reads as a bare
    # header (a numeral deletion turning "C 5" into "C"); strip again so
    # re-canonicalizing the output is a no-op
    text = _strip_matching_lines(text, header_res)

    text = re.sub(r"[ \t]+", " ", text)
    text = re.sub(r" ?\n ?", "\n", text)
    text = re.sub(r"\n{3,}", "\n\n", text)
    text = text.strip()

    return replace(doc, canonical_text=text)


def words(text: str) -> list[str]:
    """Lower-cased word tokens of a text, per the toolkit word definition."""
    return [m.group(0).casefold() for m in WORD_RE.finditer(text)]


def paragraphs(text: str) -> list[str]:
    """Paragraphs are separated by one or more blank lines."""
    return [p for p in re.split(r"\n\s*\n", text) if p.strip()]


def segment_chunks(doc: Document, min_words: int) -> list[Chunk]:
    """Greedily pack whole paragraphs into chunks of at least min_words words.

    A trailing remainder below min_words is merged into the previous chunk;
    when it is the only material, it becomes a single short-flagged chunk.
    """
    if min_words < 1:
        raise CorpusError("min_words must be >= 1")
    if not doc.canonical_text:
        raise EmptyDocumentError(f"document {doc.id!r} has no canonical text")

    chunks: list[Chunk] = []
    acc: list[str] = []
    acc_paras: list[str] = []
    for para in paragraphs(doc.canonical_text):
        toks = words(para)
        if not toks:
            continue
        acc.extend(toks)
        acc_paras.append(para)
        if len(acc) >= min_words:
            chunks.append(Chunk(doc.id, len(chunks), acc, len(acc),
                                text="\n\n".join(acc_paras)))
            acc = []
            acc_paras = []
    if acc:
        if chunks:
            last = chunks[-1]
            last.tokens.extend(acc)
            last.word_count = len(last.tokens)
            last.text += "\n\n" + "\n\n".join(acc_paras)
        else:
            chunks.append(Chunk(doc.id, 0, acc, len(acc),
                                short_flag=len(acc) < min_words,
                                text="\n\n".join(acc_paras)))
    if not chunks:
        raise EmptyDocumentError(f"document {doc.id!r} contains no words")
    return chunks


def build_profiles(docs: Sequence[Document]) -> list[AuthorProfile]:
    """Concatenate each author's canonical texts, in the given (manifest) order."""
    order: list[str] = []
    grouped: dict[str, AuthorProfile] = {}
    for doc in docs:
        if doc.author is None:
            raise UnlabeledDocumentError(f"document {doc.id!r} has no author label")
        if doc.canonical_text is None:
            raise CorpusError(f"document {doc.id!r} is not canonicalized")
        if doc.author not in grouped:
            grouped[doc.author] = AuthorProfile(doc.author, doc.canonical_text, [doc.id])
            order.append(doc.author)
        else:
            prof = grouped[doc.author]
            prof.concatenated_text += "\n\n" + doc.canonical_text
            prof.source_doc_ids.append(doc.id)
    return [grouped[a] for a in order]


def balance_chunks(
    chunks_by_author: Mapping[str, Sequence[Chunk]],
    fraction: float = 0.10,
    seed: int = 0,
) -> dict[str, list[Chunk]]:
    """Rebalance per-author chunk counts around the corpus mean.

    Authors more than `fraction` above the mean are down-sampled to the
    ceiling; authors more than `fraction` below are resampled with
    replacement up to the floor. Deterministic for a fixed seed.
    """
    if not 0 < fraction < 1:
        raise CorpusError("fraction must be strictly between 0 and 1")
    if len(chunks_by_author) < 2:
        raise CorpusError("need at least 2 authors to balance")

    mean = sum(len(v) for v in chunks_by_author.values()) / len(chunks_by_author)
    ceiling = mean * (1 + fraction)
    floor_bound = mean * (1 - fraction)
    down_target = math.floor(ceiling)
    up_target = math.ceil(floor_bound)

    rng = random.Random(seed)
    result: dict[str, list[Chunk]] = {}
    for author in sorted(chunks_by_author):
        pool = list(chunks_by_author[author])
        if len(pool) > ceiling:
            keep = sorted(rng.sample(range(len(pool)), down_target))
            result[author] = [pool[i] for i in keep]
        elif len(pool) < floor_bound:
            extra = [rng.choice(pool) for _ in range(up_target - len(pool))]
            result[author] = pool + extra
        else:
            result[author] = pool
    return {a: result[a] for a in chunks_by_author}
