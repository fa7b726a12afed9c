"""Tokenization and stylometric feature extraction.

Turns canonical text into token streams and token streams into numeric
feature matrices: function-word profiles, bag-of-words, character n-grams,
lexical and punctuation statistics, POS-tag profiles (from sidecar
annotations), and tf-idf weighted n-gram vectors.  All extraction is pure
and deterministic: the same streams, spec, and vocabulary always produce
byte-identical matrices.
"""

from __future__ import annotations

import csv
import json
import math
import os
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from .corpus import WORD_RE

__all__ = [
    "FeatureError",
    "ParameterError",
    "MissingAnnotationError",
    "VocabularyMismatchError",
    "Token",
    "TokenStream",
    "Vocabulary",
    "FeatureSpec",
    "FeatureMatrix",
    "FEATURE_KINDS",
    "DISTRIBUTION_KINDS",
    "PUNCTUATION_MARKS",
    "SENTENCE_TERMINATORS",
    "tokenize",
    "char_ngrams",
    "word_ngrams",
    "build_vocabulary",
    "extract",
    "zscore",
    "tfidf_weight",
    "load_stopwords",
    "save_csv",
    "load_csv",
    "Featurizer",
]


class FeatureError(Exception):
    """Base class for feature-extraction failures."""


class ParameterError(FeatureError):
    """A spec parameter is outside its valid range."""


class MissingAnnotationError(FeatureError):
    """A kind that needs sidecar annotations was requested without them."""


class VocabularyMismatchError(FeatureError):
    """The supplied vocabulary was built for a different unit or n-gram range."""


# Sentence-final marks.  The ellipsis is a single code point after
# canonicalization collapses repeated periods.
SENTENCE_TERMINATORS = (".", "!", "?", "…")

# Fixed inventory for the punctuation profile, in reporting order.
PUNCTUATION_MARKS = (
    ".", ",", ";", ":", "!", "?",
    "¡", "¿", "«", "»", "(", ")",
    "—", "-", "…", '"', "'",
)

WORD = "word"
PUNCT = "punctuation"
SENTENCE_END = "sentence_end"

_TOKEN_RE = re.compile(WORD_RE.pattern + r"|[^\s]")

FEATURE_KINDS = (
    "stopwords",
    "bow",
    "cng",
    "lexical",
    "punctuation",
    "lexical_punct",
    "pos",
    "word_ngrams_tfidf",
    "char_ngrams_tfidf",
    "total",
)

# Kinds whose raw rows are relative-frequency distributions (sum to 1).
DISTRIBUTION_KINDS = frozenset({"stopwords", "bow", "cng", "pos"})

# Kinds that consume a prebuilt vocabulary, with the unit it must carry.
_VOCAB_UNITS = {
    "bow": "word",
    "cng": "char_ngram",
    "word_ngrams_tfidf": "word_ngram",
    "char_ngrams_tfidf": "char_ngram",
}


@dataclass(frozen=True)
class Token:
    """One unit of a token stream.

    ``kind`` is ``word``, ``punctuation``, or ``sentence_end``.  Sentence-end
    markers are zero-width: they carry empty text and follow the punctuation
    token that closed the sentence.
    """

    text: str
    kind: str


@dataclass
class TokenStream:
    """Tokens of one sample, in document order."""

    sample_id: str
    tokens: list[Token]

    def words(self) -> list[str]:
        return [t.text for t in self.tokens if t.kind == WORD]

    def visible(self) -> list[Token]:
        """Word and punctuation tokens, without sentence-end markers."""
        return [t for t in self.tokens if t.kind != SENTENCE_END]

    def sentences(self) -> list[list[Token]]:
        """Split on sentence-end markers; a trailing unterminated run counts
        as a sentence."""
        out: list[list[Token]] = []
        current: list[Token] = []
        for tok in self.tokens:
            if tok.kind == SENTENCE_END:
                out.append(current)
                current = []
            else:
                current.append(tok)
        if current:
            out.append(current)
        return out


@dataclass(frozen=True)
class Vocabulary:
    """Ranked term list with corpus statistics.

    ``terms`` is ordered by descending corpus frequency, ties broken by the
    term string, truncated to the requested size.  ``unit`` records what the
    terms are (``word``, ``char_ngram``, ``word_ngram``) so extraction can
    reject a vocabulary built for a different granularity.
    """

    terms: tuple[str, ...]
    corpus_frequencies: tuple[int, ...]
    document_frequencies: tuple[int, ...]
    unit: str
    ngram_min: int
    ngram_max: int
    culling: float

    def __len__(self) -> int:
        return len(self.terms)

    def index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.terms)}


@dataclass(frozen=True)
class FeatureSpec:
    """Parameters of one extraction run."""

    kind: str
    mfw: int = 300
    ngram_min: int = 1
    ngram_max: int = 1
    culling: float = 0.0
    tfidf: bool = False

    def __post_init__(self) -> None:
        if self.kind not in FEATURE_KINDS:
            raise ParameterError(f"unknown feature kind: {self.kind!r}")
        if self.mfw < 1:
            raise ParameterError("mfw must be at least 1")
        if not (1 <= self.ngram_min <= self.ngram_max):
            raise ParameterError("need 1 <= ngram_min <= ngram_max")
        if not (0.0 <= self.culling <= 100.0):
            raise ParameterError("culling must lie in [0, 100]")

    @classmethod
    def for_kind(cls, kind: str) -> "FeatureSpec":
        """Default parameters for each kind."""
        defaults = {
            "stopwords": cls(kind="stopwords"),
            "bow": cls(kind="bow", mfw=300),
            "cng": cls(kind="cng", mfw=3000, ngram_min=3, ngram_max=3),
            "lexical": cls(kind="lexical"),
            "punctuation": cls(kind="punctuation"),
            "lexical_punct": cls(kind="lexical_punct"),
            "pos": cls(kind="pos", mfw=30),
            "word_ngrams_tfidf": cls(
                kind="word_ngrams_tfidf", mfw=1000,
                ngram_min=2, ngram_max=3, tfidf=True,
            ),
            "char_ngrams_tfidf": cls(
                kind="char_ngrams_tfidf", mfw=1000,
                ngram_min=2, ngram_max=4, tfidf=True,
            ),
            "total": cls(kind="total"),
        }
        if kind not in defaults:
            raise ParameterError(f"unknown feature kind: {kind!r}")
        return defaults[kind]


@dataclass
class FeatureMatrix:
    """Samples-by-features array with aligned labels.

    ``scaling`` is ``raw_relative`` straight out of extraction, ``zscore``
    or ``tfidf`` after the corresponding transform.  ``zero_rows`` lists
    samples that matched nothing in the vocabulary (their rows are all
    zero instead of a distribution); ``dropped_features`` lists columns
    removed by z-scoring because their sd was zero.
    """

    sample_ids: list[str]
    feature_names: list[str]
    values: np.ndarray
    spec: FeatureSpec
    scaling: str = "raw_relative"
    zero_rows: list[str] = field(default_factory=list)
    dropped_features: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (len(self.sample_ids), len(self.feature_names)):
            raise FeatureError(
                f"value shape {self.values.shape} does not match "
                f"{len(self.sample_ids)} samples x {len(self.feature_names)} features"
            )

    @property
    def n_samples(self) -> int:
        return len(self.sample_ids)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)


def tokenize(text: str, sample_id: str = "") -> TokenStream:
    """Split canonical text into word and punctuation tokens.

    Words follow the corpus word definition (letters with internal
    apostrophes) and are casefolded; every other non-whitespace character
    becomes a single punctuation token, so each character of the input is
    attributed to exactly one token or to whitespace.  A zero-width
    sentence-end marker is appended after the last terminator in a run of
    sentence-final marks.
    """
    raw: list[Token] = []
    for m in _TOKEN_RE.finditer(text):
        piece = m.group(0)
        if WORD_RE.fullmatch(piece):
            raw.append(Token(piece.casefold(), WORD))
        else:
            raw.append(Token(piece, PUNCT))
    out: list[Token] = []
    for i, tok in enumerate(raw):
        out.append(tok)
        if tok.kind == PUNCT and tok.text in SENTENCE_TERMINATORS:
            nxt = raw[i + 1] if i + 1 < len(raw) else None
            if nxt is None or nxt.text not in SENTENCE_TERMINATORS:
                out.append(Token("", SENTENCE_END))
    return TokenStream(sample_id=sample_id, tokens=out)


def char_ngrams(stream: TokenStream, n_min: int, n_max: int) -> list[str]:
    """Character n-grams, never crossing a sentence end.

    Tokens within a sentence are joined with ``_`` standing in for the
    space, then every substring of length ``n_min`` to ``n_max`` is
    emitted in reading order.
    """
    grams: list[str] = []
    for sentence in stream.sentences():
        s = "_".join(t.text for t in sentence)
        for n in range(n_min, n_max + 1):
            grams.extend(s[i:i + n] for i in range(len(s) - n + 1))
    return grams


def word_ngrams(stream: TokenStream, n_min: int, n_max: int) -> list[str]:
    """Word n-grams within sentences, joined with single spaces."""
    grams: list[str] = []
    for sentence in stream.sentences():
        ws = [t.text for t in sentence if t.kind == WORD]
        for n in range(n_min, n_max + 1):
            grams.extend(" ".join(ws[i:i + n]) for i in range(len(ws) - n + 1))
    return grams


def _stream_terms(stream: TokenStream, unit: str, n_min: int, n_max: int) -> list[str]:
    if unit == "word":
        return stream.words()
    if unit == "char_ngram":
        return char_ngrams(stream, n_min, n_max)
    if unit == "word_ngram":
        return word_ngrams(stream, n_min, n_max)
    raise ParameterError(f"unknown vocabulary unit: {unit!r}")


def build_vocabulary(
    streams: Sequence[TokenStream],
    unit: str = "word",
    mfw: int = 300,
    culling: float = 0.0,
    ngram_min: int = 1,
    ngram_max: int = 1,
) -> Vocabulary:
    """Rank terms by corpus frequency and keep the ``mfw`` most frequent.

    Culling removes terms present in fewer than ``culling`` percent of the
    streams before ranking.  Ties in frequency break on the term string so
    the result is independent of stream order.
    """
    if not streams:
        raise ParameterError("cannot build a vocabulary from zero streams")
    if mfw < 1:
        raise ParameterError("mfw must be at least 1")
    if not (0.0 <= culling <= 100.0):
        raise ParameterError("culling must lie in [0, 100]")
    corpus: Counter[str] = Counter()
    docfreq: Counter[str] = Counter()
    for stream in streams:
        terms = _stream_terms(stream, unit, ngram_min, ngram_max)
        corpus.update(terms)
        docfreq.update(set(terms))
    n = len(streams)
    kept = [
        t for t in corpus
        if culling == 0.0 or 100.0 * docfreq[t] / n >= culling
    ]
    kept.sort(key=lambda t: (-corpus[t], t))
    kept = kept[:mfw]
    return Vocabulary(
        terms=tuple(kept),
        corpus_frequencies=tuple(corpus[t] for t in kept),
        document_frequencies=tuple(docfreq[t] for t in kept),
        unit=unit,
        ngram_min=ngram_min,
        ngram_max=ngram_max,
        culling=culling,
    )


def load_stopwords(path: str | None = None) -> tuple[str, ...]:
    """Load the function-word list: one word per line, ``#`` comments allowed.

    Without a path the Spanish list shipped with the package is used.
    """
    if path is None:
        text = (
            resources.files("stylo.data")
            .joinpath("stopwords_es.txt")
            .read_text(encoding="utf-8")
        )
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    out = []
    for line in text.splitlines():
        word = line.split("#", 1)[0].strip()
        if word:
            out.append(word.casefold())
    if not out:
        raise ParameterError("stopword list is empty")
    return tuple(out)


def _distribution_rows(
    streams: Sequence[TokenStream],
    term_lists: list[list[str]],
    terms: Sequence[str],
) -> tuple[np.ndarray, list[str]]:
    """Count ``terms`` per stream and normalize rows to sum to 1.

    Streams with no hits keep a zero row and are reported back.
    """
    index = {t: i for i, t in enumerate(terms)}
    values = np.zeros((len(streams), len(terms)), dtype=np.float64)
    zero_rows: list[str] = []
    for r, (stream, stream_terms) in enumerate(zip(streams, term_lists)):
        for t in stream_terms:
            c = index.get(t)
            if c is not None:
                values[r, c] += 1.0
        total = values[r].sum()
        if total > 0.0:
            values[r] /= total
        else:
            zero_rows.append(stream.sample_id)
    return values, zero_rows


def _count_rows(
    streams: Sequence[TokenStream],
    term_lists: list[list[str]],
    terms: Sequence[str],
) -> np.ndarray:
    index = {t: i for i, t in enumerate(terms)}
    values = np.zeros((len(streams), len(terms)), dtype=np.float64)
    for r, stream_terms in enumerate(term_lists):
        for t in stream_terms:
            c = index.get(t)
            if c is not None:
                values[r, c] += 1.0
    return values


def _lexical_rows(streams: Sequence[TokenStream]) -> np.ndarray:
    """Per-sample [mean sentence length, sd sentence length, mean type/token
    ratio], over sentences that contain at least one word."""
    values = np.zeros((len(streams), 3), dtype=np.float64)
    for r, stream in enumerate(streams):
        lengths: list[int] = []
        ratios: list[float] = []
        for sentence in stream.sentences():
            ws = [t.text for t in sentence if t.kind == WORD]
            if not ws:
                continue
            lengths.append(len(ws))
            ratios.append(len(set(ws)) / len(ws))
        if lengths:
            arr = np.array(lengths, dtype=np.float64)
            values[r, 0] = arr.mean()
            values[r, 1] = arr.std()
            values[r, 2] = float(np.mean(ratios))
    return values


def _punctuation_rows(streams: Sequence[TokenStream]) -> np.ndarray:
    """Rate of each inventory mark per 1000 tokens (words + punctuation)."""
    values = np.zeros((len(streams), len(PUNCTUATION_MARKS)), dtype=np.float64)
    index = {m: i for i, m in enumerate(PUNCTUATION_MARKS)}
    for r, stream in enumerate(streams):
        visible = stream.visible()
        if not visible:
            continue
        for tok in visible:
            if tok.kind == PUNCT:
                c = index.get(tok.text)
                if c is not None:
                    values[r, c] += 1.0
        values[r] *= 1000.0 / len(visible)
    return values


_LEXICAL_NAMES = (
    "mean_sentence_words",
    "sd_sentence_words",
    "mean_type_token_ratio",
)


def _prefixed(kind: str, names: Iterable[str]) -> list[str]:
    return [f"{kind}:{n}" for n in names]


def _require_vocab(
    spec: FeatureSpec,
    vocab: Vocabulary | None,
    streams: Sequence[TokenStream],
) -> Vocabulary:
    unit = _VOCAB_UNITS[spec.kind]
    if vocab is None:
        return build_vocabulary(
            streams, unit=unit, mfw=spec.mfw, culling=spec.culling,
            ngram_min=spec.ngram_min, ngram_max=spec.ngram_max,
        )
    if vocab.unit != unit:
        raise VocabularyMismatchError(
            f"kind {spec.kind!r} needs a {unit} vocabulary, "
            f"got {vocab.unit!r}"
        )
    if unit != "word" and (vocab.ngram_min, vocab.ngram_max) != (spec.ngram_min, spec.ngram_max):
        raise VocabularyMismatchError(
            f"vocabulary n-gram range {vocab.ngram_min}..{vocab.ngram_max} "
            f"does not match spec {spec.ngram_min}..{spec.ngram_max}"
        )
    return vocab


def extract(
    streams: Sequence[TokenStream],
    spec: FeatureSpec,
    vocab: Vocabulary | None = None,
    *,
    stopwords: Sequence[str] | None = None,
    pos_tags: Sequence[Sequence[str]] | None = None,
) -> FeatureMatrix:
    """Extract one feature matrix from token streams.

    Distribution kinds (stopwords, bow, cng, pos) yield relative
    frequencies over their vocabulary; lexical and punctuation kinds yield
    raw statistics; tf-idf kinds yield weighted, row-normalized vectors.
    ``total`` concatenates every other family once, in declared order,
    each column prefixed with its kind.

    ``pos_tags`` supplies one tag sequence per stream, aligned with the
    stream's word and punctuation tokens (sentence-end markers carry no
    tag).
    """
    if not streams:
        raise ParameterError("cannot extract features from zero streams")
    ids = [s.sample_id for s in streams]
    kind = spec.kind

    if kind == "stopwords":
        terms = tuple(stopwords) if stopwords is not None else load_stopwords()
        lists = [s.words() for s in streams]
        values, zero = _distribution_rows(streams, lists, terms)
        return FeatureMatrix(ids, list(terms), values, spec, zero_rows=zero)

    if kind in ("bow", "cng"):
        vocab = _require_vocab(spec, vocab, streams)
        unit = _VOCAB_UNITS[kind]
        lists = [
            _stream_terms(s, unit, vocab.ngram_min, vocab.ngram_max)
            for s in streams
        ]
        values, zero = _distribution_rows(streams, lists, vocab.terms)
        return FeatureMatrix(ids, list(vocab.terms), values, spec, zero_rows=zero)

    if kind == "lexical":
        return FeatureMatrix(ids, list(_LEXICAL_NAMES), _lexical_rows(streams), spec)

    if kind == "punctuation":
        return FeatureMatrix(
            ids, list(PUNCTUATION_MARKS), _punctuation_rows(streams), spec,
        )

    if kind == "lexical_punct":
        names = _prefixed("lexical", _LEXICAL_NAMES) + _prefixed("punctuation", PUNCTUATION_MARKS)
        values = np.hstack([_lexical_rows(streams), _punctuation_rows(streams)])
        return FeatureMatrix(ids, names, values, spec)

    if kind == "pos":
        if pos_tags is None:
            raise MissingAnnotationError(
                "POS features need sidecar tag sequences (pos_tags=...)"
            )
        if len(pos_tags) != len(streams):
            raise MissingAnnotationError(
                f"got {len(pos_tags)} tag sequences for {len(streams)} streams"
            )
        lists = [list(tags) for tags in pos_tags]
        for stream, tags in zip(streams, lists):
            if len(tags) != len(stream.visible()):
                raise MissingAnnotationError(
                    f"sample {stream.sample_id!r}: {len(tags)} tags for "
                    f"{len(stream.visible())} tokens"
                )
        counts: Counter[str] = Counter()
        for tags in lists:
            counts.update(tags)
        terms = sorted(counts, key=lambda t: (-counts[t], t))[:spec.mfw]
        values, zero = _distribution_rows(streams, lists, terms)
        return FeatureMatrix(ids, list(terms), values, spec, zero_rows=zero)

    if kind in ("word_ngrams_tfidf", "char_ngrams_tfidf"):
        vocab = _require_vocab(spec, vocab, streams)
        unit = _VOCAB_UNITS[kind]
        lists = [
            _stream_terms(s, unit, vocab.ngram_min, vocab.ngram_max)
            for s in streams
        ]
        counts = _count_rows(streams, lists, vocab.terms)
        raw = FeatureMatrix(ids, list(vocab.terms), counts, spec)
        return tfidf_weight(raw)

    if kind == "total":
        parts = []
        for part_kind in ("stopwords", "bow", "cng", "lexical", "punctuation",
                          "pos", "word_ngrams_tfidf", "char_ngrams_tfidf"):
            if part_kind == "pos" and pos_tags is None:
                continue
            part_spec = FeatureSpec.for_kind(part_kind)
            parts.append(extract(
                streams, part_spec, stopwords=stopwords, pos_tags=pos_tags,
            ))
        names = [f"{p.spec.kind}:{n}" for p in parts for n in p.feature_names]
        values = np.hstack([p.values for p in parts])
        zero = sorted({sid for p in parts for sid in p.zero_rows})
        return FeatureMatrix(ids, names, values, spec, zero_rows=zero)

    raise ParameterError(f"unknown feature kind: {kind!r}")


def zscore(matrix: FeatureMatrix) -> FeatureMatrix:
    """Standardize each column to zero mean and unit sd (population sd).

    Columns whose sd is exactly zero carry no signal and are dropped; the
    dropped names are recorded on the result.  Needs at least two samples.
    """
    if matrix.n_samples < 2:
        raise ParameterError("z-scoring needs at least two samples")
    mean = matrix.values.mean(axis=0)
    sd = matrix.values.std(axis=0)
    keep = sd != 0.0
    dropped = [n for n, k in zip(matrix.feature_names, keep) if not k]
    values = (matrix.values[:, keep] - mean[keep]) / sd[keep]
    return FeatureMatrix(
        sample_ids=list(matrix.sample_ids),
        feature_names=[n for n, k in zip(matrix.feature_names, keep) if k],
        values=values,
        spec=matrix.spec,
        scaling="zscore",
        zero_rows=list(matrix.zero_rows),
        dropped_features=dropped,
    )


def tfidf_weight(matrix: FeatureMatrix) -> FeatureMatrix:
    """Apply smoothed idf weights to raw counts and L2-normalize rows.

    Counts must be non-negative.
    The weight for term t is ``count * ln((1 + N) / (1 + df(t)))`` with N
    the number of samples and df the number of samples containing t.
    All-zero rows stay zero and are flagged.
    """
    if (matrix.values < 0.0).any():
        raise FeatureError("tf-idf weighting needs non-negative counts")
    n = matrix.n_samples
    df = (matrix.values > 0.0).sum(axis=0)
    idf = np.log((1.0 + n) / (1.0 + df))
    values = matrix.values * idf
    norms = np.sqrt((values * values).sum(axis=1))
    zero_rows = [sid for sid, nv in zip(matrix.sample_ids, norms) if nv == 0.0]
    safe = np.where(norms == 0.0, 1.0, norms)
    values = values / safe[:, None]
    return FeatureMatrix(
        sample_ids=list(matrix.sample_ids),
        feature_names=list(matrix.feature_names),
        values=values,
        spec=matrix.spec,
        scaling="tfidf",
        zero_rows=zero_rows,
    )


class Featurizer:
    """Fit-on-training, transform-anything feature extraction.

    ``extract`` derives vocabularies and idf weights from the streams it
    is handed, which is wrong for query material: query chunks must be
    projected into the training feature space.  A Featurizer captures
    that space once (vocabularies, idf vectors, the POS tag inventory)
    and reuses it for every later transform.
    """

    def __init__(
        self,
        spec: FeatureSpec,
        stopwords: Sequence[str] | None = None,
    ) -> None:
        self.spec = spec
        self._stopwords = tuple(stopwords) if stopwords is not None else None
        self._vocab: Vocabulary | None = None
        self._idf: np.ndarray | None = None
        self._pos_terms: tuple[str, ...] | None = None
        self._parts: list["Featurizer"] | None = None
        self._fitted = False

    def fit(
        self,
        streams: Sequence[TokenStream],
        pos_tags: Sequence[Sequence[str]] | None = None,
    ) -> "Featurizer":
        if not streams:
            raise ParameterError("cannot fit a featurizer on zero streams")
        kind = self.spec.kind
        if kind == "stopwords" and self._stopwords is None:
            self._stopwords = load_stopwords()
        if kind in _VOCAB_UNITS:
            self._vocab = _require_vocab(self.spec, None, streams)
        if kind in ("word_ngrams_tfidf", "char_ngrams_tfidf"):
            unit = _VOCAB_UNITS[kind]
            lists = [
                _stream_terms(s, unit, self._vocab.ngram_min, self._vocab.ngram_max)
                for s in streams
            ]
            counts = _count_rows(streams, lists, self._vocab.terms)
            df = (counts > 0.0).sum(axis=0)
            self._idf = np.log((1.0 + len(streams)) / (1.0 + df))
        if kind == "pos":
            if pos_tags is None:
                raise MissingAnnotationError("POS featurizer needs pos_tags to fit")
            tally: Counter[str] = Counter()
            for tags in pos_tags:
                tally.update(tags)
            self._pos_terms = tuple(
                sorted(tally, key=lambda t: (-tally[t], t))[:self.spec.mfw]
            )
        if kind == "total":
            self._parts = []
            for part_kind in ("stopwords", "bow", "cng", "lexical", "punctuation",
                              "pos", "word_ngrams_tfidf", "char_ngrams_tfidf"):
                if part_kind == "pos" and pos_tags is None:
                    continue
                part = Featurizer(FeatureSpec.for_kind(part_kind), self._stopwords)
                part.fit(streams, pos_tags)
                self._parts.append(part)
        self._fitted = True
        return self

    def transform(
        self,
        streams: Sequence[TokenStream],
        pos_tags: Sequence[Sequence[str]] | None = None,
    ) -> FeatureMatrix:
        if not self._fitted:
            raise FeatureError("featurizer is not fitted")
        kind = self.spec.kind
        if kind in ("lexical", "punctuation", "lexical_punct", "stopwords", "bow", "cng"):
            return extract(
                streams, self.spec, self._vocab, stopwords=self._stopwords,
            )
        if kind == "pos":
            if pos_tags is None:
                raise MissingAnnotationError("POS transform needs pos_tags")
            ids = [s.sample_id for s in streams]
            lists = [list(tags) for tags in pos_tags]
            values, zero = _distribution_rows(streams, lists, self._pos_terms)
            return FeatureMatrix(
                ids, list(self._pos_terms), values, self.spec, zero_rows=zero,
            )
        if kind in ("word_ngrams_tfidf", "char_ngrams_tfidf"):
            unit = _VOCAB_UNITS[kind]
            lists = [
                _stream_terms(s, unit, self._vocab.ngram_min, self._vocab.ngram_max)
                for s in streams
            ]
            counts = _count_rows(streams, lists, self._vocab.terms)
            values = counts * self._idf
            norms = np.sqrt((values * values).sum(axis=1))
            ids = [s.sample_id for s in streams]
            zero = [sid for sid, nv in zip(ids, norms) if nv == 0.0]
            safe = np.where(norms == 0.0, 1.0, norms)
            return FeatureMatrix(
                ids, list(self._vocab.terms), values / safe[:, None],
                self.spec, scaling="tfidf", zero_rows=zero,
            )
        if kind == "total":
            parts = [p.transform(streams, pos_tags) for p in self._parts]
            names = [f"{p.spec.kind}:{n}" for p in parts for n in p.feature_names]
            values = np.hstack([p.values for p in parts])
            zero = sorted({sid for p in parts for sid in p.zero_rows})
            return FeatureMatrix(
                [s.sample_id for s in streams], names, values, self.spec, zero_rows=zero,
            )
        raise ParameterError(f"unknown feature kind: {kind!r}")

    def fit_transform(
        self,
        streams: Sequence[TokenStream],
        pos_tags: Sequence[Sequence[str]] | None = None,
    ) -> FeatureMatrix:
        return self.fit(streams, pos_tags).transform(streams, pos_tags)


def save_csv(matrix: FeatureMatrix, path: str) -> None:
    """Write the matrix as CSV (header ``id`` plus feature names, floats in
    full repr precision) alongside a ``.spec.json`` envelope recording the
    spec, scaling, and row/column flags."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id"] + list(matrix.feature_names))
        for sid, row in zip(matrix.sample_ids, matrix.values):
            writer.writerow([sid] + [repr(float(v)) for v in row])
    envelope = {
        "spec": {
            "kind": matrix.spec.kind,
            "mfw": matrix.spec.mfw,
            "ngram_min": matrix.spec.ngram_min,
            "ngram_max": matrix.spec.ngram_max,
            "culling": matrix.spec.culling,
            "tfidf": matrix.spec.tfidf,
        },
        "scaling": matrix.scaling,
        "zero_rows": list(matrix.zero_rows),
        "dropped_features": list(matrix.dropped_features),
    }
    with open(_envelope_path(path), "w", encoding="utf-8") as fh:
        json.dump(envelope, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


def _envelope_path(path: str) -> str:
    return path + ".spec.json"


def load_csv(path: str, spec: FeatureSpec | None = None) -> FeatureMatrix:
    """Read a matrix written by save_csv, restoring the spec and flags from
    the envelope when present (an explicit ``spec`` argument wins)."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "id":
            raise FeatureError(f"{path}: expected an 'id' header column")
        names = header[1:]
        ids: list[str] = []
        rows: list[list[float]] = []
        for line in reader:
            ids.append(line[0])
            rows.append([float(v) for v in line[1:]])
    values = np.array(rows, dtype=np.float64) if rows else np.zeros((0, len(names)))
    scaling = "raw_relative"
    zero_rows: tuple[str, ...] = ()
    dropped: tuple[str, ...] = ()
    if os.path.exists(_envelope_path(path)):
        with open(_envelope_path(path), encoding="utf-8") as fh:
            envelope = json.load(fh)
        if spec is None:
            spec = FeatureSpec(**envelope["spec"])
        scaling = envelope.get("scaling", scaling)
        zero_rows = tuple(envelope.get("zero_rows", ()))
        dropped = tuple(envelope.get("dropped_features", ()))
    return FeatureMatrix(
        sample_ids=ids,
        feature_names=names,
        values=values,
        spec=spec if spec is not None else FeatureSpec(kind="bow"),
        scaling=scaling,
        zero_rows=zero_rows,
        dropped_features=dropped,
    )
