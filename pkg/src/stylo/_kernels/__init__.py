"""Kernel backend selection.

The compiled Cython core is preferred; the numpy fallback is used when the
extension is unavailable or when STYLO_KERNELS=pure is set. Both expose the
same functions and agree to floating-point tolerance.
"""

from __future__ import annotations

import os

from . import pure

MEAN_ABS = pure.MEAN_ABS
WEIGHTED_ABS = pure.WEIGHTED_ABS
MANHATTAN = pure.MANHATTAN
EUCLIDEAN = pure.EUCLIDEAN
CANBERRA = pure.CANBERRA
COSINE = pure.COSINE

if os.environ.get("STYLO_KERNELS", "").lower() == "pure":
    _impl = pure
    BACKEND = "pure"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = pure
        BACKEND = "pure"

pairwise_kernel = _impl.pairwise_kernel
hinge_fullbatch = _impl.hinge_fullbatch
hinge_sgd = _impl.hinge_sgd


def backends() -> dict[str, object]:
    """Importable backends by name (for benchmarks and cross-checks)."""
    found: dict[str, object] = {"pure": pure}
    try:
        from . import _core

        found["compiled"] = _core
    except ImportError:
        pass
    return found
