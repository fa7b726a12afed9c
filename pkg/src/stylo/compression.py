"""Normalized compression distance over a pluggable compressor interface.

NCD(x, y) = (C(xy) - min(C(x), C(y))) / max(C(x), C(y)), with C the
compressed size in bytes and xy plain concatenation without a separator.
Real compressors are order-sensitive, so the value is symmetrized by
taking the smaller of the two concatenation orders.

Two compressors ship by default: a block-sorting one (bz2) and a
dictionary one (zlib).  Arbitrary external compressors can be wired in
through a command adapter, which is never registered implicitly.
"""

from __future__ import annotations

import bz2
import json
import subprocess
import zlib
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .distance import Dendrogram, DistanceMatrix, cluster

__all__ = [
    "CompressionError",
    "Compressor",
    "NcdMatrix",
    "builtin_compressors",
    "get_compressor",
    "make_external_compressor",
    "compressed_size",
    "ncd",
    "ncd_matrix",
    "ncd_tree",
    "save_ncd_json",
    "load_ncd_json",
]

# Real compressors overshoot the ideal [0, 1] range slightly; anything
# past this is a bug, not slack.
NCD_CEILING = 1.2


class CompressionError(Exception):
    """Invalid input to an NCD computation."""


@dataclass(frozen=True)
class Compressor:
    """A deterministic lossless compressor.

    Only the length of ``compress`` output is ever used, so an adapter
    need not expose decompression; the shipped compressors are verified
    lossless in tests.
    """

    id: str
    compress: Callable[[bytes], bytes]
    level: int


def builtin_compressors() -> dict[str, Compressor]:
    """The two compressors shipped with the package, keyed by id."""
    return {
        "bz2": Compressor(id="bz2", compress=lambda b: bz2.compress(b, 9), level=9),
        "zlib": Compressor(id="zlib", compress=lambda b: zlib.compress(b, 9), level=9),
    }


def get_compressor(compressor_id: str) -> Compressor:
    table = builtin_compressors()
    if compressor_id not in table:
        raise CompressionError(
            f"unknown compressor {compressor_id!r}; available: {sorted(table)}"
        )
    return table[compressor_id]


def make_external_compressor(
    compressor_id: str,
    command: str,
    args: Sequence[str] = (),
    timeout_s: float = 60.0,
) -> Compressor:
    """Wrap an external command as a compressor.

    The command receives the input on stdin and must write the compressed
    stream to stdout.  Nothing registers these implicitly; callers opt in
    per run.
    """

    def compress(data: bytes) -> bytes:
        try:
            proc = subprocess.run(
                [command, *args],
                input=data,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                timeout=timeout_s,
                check=True,
            )
        except FileNotFoundError as exc:
            raise CompressionError(f"external compressor not found: {command!r}") from exc
        except subprocess.TimeoutExpired as exc:
            raise CompressionError(
                f"external compressor timed out after {timeout_s}s"
            ) from exc
        except subprocess.CalledProcessError as exc:
            raise CompressionError(
                f"external compressor failed with status {exc.returncode}"
            ) from exc
        return proc.stdout

    return Compressor(id=compressor_id, compress=compress, level=0)


@dataclass
class NcdMatrix:
    """Symmetric NCD values with ids and the compressor that produced them.

    The diagonal holds NCD(x, x), small but not exactly zero for real
    compressors.  ``mode`` records whether rows are author profiles or
    individual works.
    """

    ids: list[str]
    values: np.ndarray
    compressor_id: str
    mode: str

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        n = len(self.ids)
        if self.values.shape != (n, n):
            raise CompressionError(f"matrix shape {self.values.shape} for {n} ids")
        if self.mode not in ("profile", "instance"):
            raise CompressionError(f"mode must be profile or instance, got {self.mode!r}")
        if np.any(self.values < 0.0) or np.any(self.values > NCD_CEILING):
            raise CompressionError(
                f"NCD values outside [0, {NCD_CEILING}]; compressor misbehaving?"
            )
        if not np.array_equal(self.values, self.values.T):
            raise CompressionError("NCD matrix must be symmetric")


class _SizeCache:
    """Memoized compressed sizes for one compressor."""

    def __init__(self, compressor: Compressor) -> None:
        self.compressor = compressor
        self._single: dict[bytes, int] = {}

    def size(self, data: bytes) -> int:
        hit = self._single.get(data)
        if hit is None:
            hit = len(self.compressor.compress(data))
            self._single[data] = hit
        return hit


def compressed_size(data: bytes, compressor: Compressor) -> int:
    """Size of the compressor's output in bytes."""
    return len(compressor.compress(data))


def _ncd_from_sizes(cx: int, cy: int, cxy: int, cyx: int) -> float:
    joint = min(cxy, cyx)
    value = (joint - min(cx, cy)) / max(cx, cy)
    # tiny negatives can appear when the joint stream compresses past the
    # smaller single; clamp, it means "indistinguishable"
    return max(0.0, value)


def ncd(x: bytes, y: bytes, compressor: Compressor) -> float:
    """Symmetrized normalized compression distance between two byte strings."""
    if not x or not y:
        raise CompressionError("NCD needs non-empty inputs")
    cx = compressed_size(x, compressor)
    cy = compressed_size(y, compressor)
    cxy = compressed_size(x + y, compressor)
    cyx = compressed_size(y + x, compressor)
    return _ncd_from_sizes(cx, cy, cxy, cyx)


def ncd_matrix(
    samples: Sequence[tuple[str, str]],
    compressor: Compressor,
    mode: str = "instance",
) -> NcdMatrix:
    """Full NCD matrix over (id, text) samples.

    Single-text sizes are computed once up front; each unordered pair
    costs two joint compressions (both concatenation orders).
    """
    if len(samples) < 2:
        raise CompressionError("NCD matrix needs at least two samples")
    ids = [sid for sid, _ in samples]
    if len(set(ids)) != len(ids):
        raise CompressionError("duplicate sample ids in NCD matrix input")
    blobs = []
    for sid, text in samples:
        data = text.encode("utf-8")
        if not data:
            raise CompressionError(f"sample {sid!r} is empty")
        blobs.append(data)
    cache = _SizeCache(compressor)
    singles = [cache.size(b) for b in blobs]
    n = len(samples)
    values = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        cii = cache.size(blobs[i] + blobs[i])
        values[i, i] = _ncd_from_sizes(singles[i], singles[i], cii, cii)
        for j in range(i + 1, n):
            cxy = cache.size(blobs[i] + blobs[j])
            cyx = cache.size(blobs[j] + blobs[i])
            v = _ncd_from_sizes(singles[i], singles[j], cxy, cyx)
            values[i, j] = v
            values[j, i] = v
    return NcdMatrix(ids=ids, values=values, compressor_id=compressor.id, mode=mode)


def ncd_tree(matrix: NcdMatrix, linkage: str = "average") -> Dendrogram:
    """Agglomerative tree over an NCD matrix.

    The diagonal is zeroed before clustering; self-distance is noise
    from the compressor header, not structure.
    """
    values = matrix.values.copy()
    np.fill_diagonal(values, 0.0)
    dist = DistanceMatrix(
        ids=list(matrix.ids),
        values=values,
        kind="ncd",
        params={"compressor": matrix.compressor_id, "mode": matrix.mode},
    )
    return cluster(dist, linkage=linkage)


def save_ncd_json(matrix: NcdMatrix, path: str) -> None:
    """JSON envelope: ids, row-major values, compressor id, and mode."""
    payload = {
        "ids": list(matrix.ids),
        "compressor_id": matrix.compressor_id,
        "mode": matrix.mode,
        "values": [[float(v) for v in row] for row in matrix.values],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2)
        fh.write("\n")


def load_ncd_json(path: str) -> NcdMatrix:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return NcdMatrix(
        ids=list(payload["ids"]),
        values=np.array(payload["values"], dtype=np.float64),
        compressor_id=payload["compressor_id"],
        mode=payload["mode"],
    )
