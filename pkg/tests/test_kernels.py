"""Compiled and pure kernel backends compute the same numbers."""

from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest

from stylo._kernels import BACKEND, backends, pure

KINDS = {
    "mean_abs": pure.MEAN_ABS,
    "weighted_abs": pure.WEIGHTED_ABS,
    "manhattan": pure.MANHATTAN,
    "euclidean": pure.EUCLIDEAN,
    "canberra": pure.CANBERRA,
    "cosine": pure.COSINE,
}

both = pytest.mark.skipif(
    "compiled" not in backends(), reason="compiled core not built"
)


class TestAgreement:
    @both
    @pytest.mark.parametrize("name", sorted(KINDS))
    def test_pairwise_matches(self, name: str) -> None:
        compiled = backends()["compiled"]
        rng = np.random.default_rng(6)
        X = rng.normal(size=(25, 40))
        w = np.abs(rng.normal(size=40)) + 0.1
        kind = KINDS[name]
        args = (w,) if name == "weighted_abs" else ()
        a = pure.pairwise_kernel(X, kind, *args)
        b = compiled.pairwise_kernel(X, kind, *args)
        assert a.shape == b.shape == (25, 25)
        assert np.max(np.abs(a - b)) < 1e-10, name

    @both
    def test_hinge_fullbatch_matches(self) -> None:
        compiled = backends()["compiled"]
        rng = np.random.default_rng(7)
        X = np.hstack([rng.normal(size=(30, 8)), np.ones((30, 1))])
        y = np.where(X[:, 0] + 0.3 * X[:, 1] > 0, 1.0, -1.0)
        a = pure.hinge_fullbatch(X, y, epochs=200, lam=1e-3)
        b = compiled.hinge_fullbatch(X, y, epochs=200, lam=1e-3)
        assert np.max(np.abs(a - b)) < 1e-8

    @both
    def test_hinge_sgd_matches(self) -> None:
        compiled = backends()["compiled"]
        rng = np.random.default_rng(8)
        X = np.hstack([rng.normal(size=(20, 5)), np.ones((20, 1))])
        y = np.where(X[:, 0] > 0, 1.0, -1.0)
        orders = np.vstack([rng.permutation(20) for _ in range(15)])
        a = pure.hinge_sgd(X, y, orders, lam=1e-3)
        b = compiled.hinge_sgd(X, y, orders, lam=1e-3)
        assert np.max(np.abs(a - b)) < 1e-8


class TestSelection:
    def test_active_backend_is_known(self) -> None:
        assert BACKEND in ("compiled", "pure")
        assert BACKEND in backends()

    def test_pure_listing_always_present(self) -> None:
        assert "pure" in backends()

    def test_env_override_forces_pure(self) -> None:
        code = "import stylo; print(stylo.kernel_backend)"
        env = dict(os.environ, STYLO_KERNELS="pure")
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True
        )
        assert out.returncode == 0, out.stderr
        assert out.stdout.strip() == "pure"

    @both
    def test_default_prefers_compiled(self) -> None:
        code = "import stylo; print(stylo.kernel_backend)"
        env = {k: v for k, v in os.environ.items() if k != "STYLO_KERNELS"}
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True
        )
        assert out.returncode == 0, out.stderr
        assert out.stdout.strip() == "compiled"
