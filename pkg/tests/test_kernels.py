"""Hot-kernel correctness against the naive loop references."""

import os
import subprocess
import sys

import numpy as np
import pytest

from semcom import kernels
from oracle_utils import naive_conv2d

RNG = np.random.default_rng(2024)

GEOMETRIES = [
    # (N, Cin, H, W, Cout, K, stride, padding)
    (1, 1, 5, 5, 1, 3, 1, 0),
    (2, 3, 9, 7, 4, 4, 2, 1),
    (1, 2, 8, 8, 3, 4, 2, 1),
    (2, 2, 6, 6, 2, 3, 1, 2),
    (1, 4, 12, 10, 5, 5, 3, 2),
    (3, 1, 4, 4, 1, 1, 1, 0),
]


def test_out_hw_formulas():
    assert kernels.conv2d_out_hw(64, 64, 4, 2, 1) == (32, 32)
    assert kernels.conv2d_out_hw(5, 7, 3, 1, 0) == (3, 5)
    assert kernels.conv_transpose2d_out_hw(32, 32, 4, 2, 1) == (64, 64)
    assert kernels.conv_transpose2d_out_hw(1, 1, 2, 2, 0) == (2, 2)


@pytest.mark.parametrize("n,ci,h,w,co,k,s,p", GEOMETRIES)
def test_forward_matches_naive(n, ci, h, w, co, k, s, p):
    x = RNG.standard_normal((n, ci, h, w)).astype(np.float32)
    wt = RNG.standard_normal((co, ci, k, k)).astype(np.float32)
    b = RNG.standard_normal(co).astype(np.float32)
    got = kernels.conv2d_forward(x, wt, b, s, p)
    ref = naive_conv2d(x, wt, b, s, p)
    assert got.shape == ref.shape
    np.testing.assert_allclose(got, ref, rtol=1e-5, atol=1e-5)


@pytest.mark.parametrize("n,ci,h,w,co,k,s,p", GEOMETRIES)
def test_grad_kernels_satisfy_adjoint_identity(n, ci, h, w, co, k, s, p):
    # <conv(x), g> must equal <x, input_grad(g)> and <w, weight_grad(g)>;
    # holds exactly for the true adjoint, so it pins both gradient kernels
    # against the (naively verified) forward
    x = RNG.standard_normal((n, ci, h, w))
    wt = RNG.standard_normal((co, ci, k, k))
    y = kernels.conv2d_forward(x, wt, np.zeros(co), s, p)
    g = RNG.standard_normal(y.shape)
    dx = kernels.conv2d_input_grad(g, wt, s, p, h, w)
    dw = kernels.conv2d_weight_grad(g, x, s, p, k)
    lhs = float((y * g).sum())
    assert np.isclose(lhs, float((x * dx).sum()), rtol=1e-10)
    assert np.isclose(lhs, float((wt * dw).sum()), rtol=1e-10)


def test_weight_grad_matches_naive_fd():
    # direct check of one dw entry by perturbing the forward
    x = RNG.standard_normal((1, 2, 6, 6))
    wt = RNG.standard_normal((3, 2, 3, 3))
    g = RNG.standard_normal((1, 3, 4, 4))
    dw = kernels.conv2d_weight_grad(g, x, 1, 0, 3)
    h = 1e-6
    for co, ci, kh, kw in [(0, 0, 0, 0), (2, 1, 2, 2), (1, 0, 1, 2)]:
        wp = wt.copy()
        wp[co, ci, kh, kw] += h
        wm = wt.copy()
        wm[co, ci, kh, kw] -= h
        fp = (naive_conv2d(x, wp, np.zeros(3), 1, 0) * g).sum()
        fm = (naive_conv2d(x, wm, np.zeros(3), 1, 0) * g).sum()
        assert np.isclose(dw[co, ci, kh, kw], (fp - fm) / (2 * h), rtol=1e-4)


def test_float64_pass_through():
    x = RNG.standard_normal((1, 2, 8, 8))
    wt = RNG.standard_normal((2, 2, 4, 4))
    b = RNG.standard_normal(2)
    out = kernels.conv2d_forward(x, wt, b, 2, 1)
    assert out.dtype == np.float64


def test_forward_deterministic_within_backend():
    x = RNG.standard_normal((2, 3, 16, 16)).astype(np.float32)
    wt = RNG.standard_normal((4, 3, 4, 4)).astype(np.float32)
    b = RNG.standard_normal(4).astype(np.float32)
    a = kernels.conv2d_forward(x, wt, b, 2, 1)
    c = kernels.conv2d_forward(x, wt, b, 2, 1)
    assert np.array_equal(a, c)


def test_backend_flag_reflects_environment():
    assert kernels.BACKEND in ("numba", "numpy")
    if os.environ.get("SEMCOM_JIT", "1").lower() in ("0", "false", "no"):
        assert kernels.BACKEND == "numpy"


def test_numpy_fallback_agrees_with_active_backend(tmp_path):
    # run the same conv in a subprocess with the JIT disabled and compare
    x = RNG.standard_normal((2, 3, 12, 12)).astype(np.float32)
    wt = RNG.standard_normal((4, 3, 4, 4)).astype(np.float32)
    b = RNG.standard_normal(4).astype(np.float32)
    here = kernels.conv2d_forward(x, wt, b, 2, 1)
    np.save(tmp_path / "x.npy", x)
    np.save(tmp_path / "w.npy", wt)
    np.save(tmp_path / "b.npy", b)
    code = (
        "import numpy as np; from semcom import kernels; "
        f"base = {str(tmp_path)!r}; "
        "x = np.load(base + '/x.npy'); w = np.load(base + '/w.npy'); "
        "b = np.load(base + '/b.npy'); "
        "np.save(base + '/out.npy', kernels.conv2d_forward(x, w, b, 2, 1)); "
        "print(kernels.BACKEND)"
    )
    env = dict(os.environ, SEMCOM_JIT="0")
    res = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    assert res.stdout.strip() == "numpy"
    other = np.load(tmp_path / "out.npy")
    np.testing.assert_allclose(here, other, rtol=1e-5, atol=1e-5)
