"""Convolution inner loops: numba-jitted kernels with a pure-numpy fallback.

The backend is fixed at import time. numba is used when it is importable
and the ``SEMCOM_JIT`` environment variable is unset or truthy; setting
``SEMCOM_JIT=0`` selects the numpy path (useful for debugging and on
machines where LLVM compilation is unwanted). ``benchmarks/bench_kernels.py``
compares the two.

All kernels are deterministic: every output element is accumulated in a
fixed order, so repeated calls on identical inputs are bit-identical
within one backend. The two backends agree only up to float rounding
(different accumulation orders).

Shapes follow the NCHW convention. Weight layout is [Cout, Cin, K, K] for
the forward convolution; the transposed convolution reuses these kernels
with its [Cin, Cout, K, K] weight (see tensor.py).
"""

from __future__ import annotations

import os

import numpy as np

JIT_ENABLED = os.environ.get("SEMCOM_JIT", "1").lower() not in ("0", "false", "no")

if JIT_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
        JIT_ENABLED = False

BACKEND = "numba" if JIT_ENABLED else "numpy"

if not JIT_ENABLED:
    def njit(*args, **kwargs):
        # no-op decorator so the jitted definitions below stay importable
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


# ---------------------------------------------------------------------------
# numba kernels (plain loops; element-wise accumulation order is fixed)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _conv2d_forward_jit(x, w, b, stride, padding, out):
    N, Ci, H, W = x.shape
    Co = w.shape[0]
    K = w.shape[2]
    Ho = out.shape[2]
    Wo = out.shape[3]
    for n in range(N):
        for co in range(Co):
            out[n, co, :, :] = b[co]
            for ci in range(Ci):
                for kh in range(K):
                    oh0 = max(0, -(-(padding - kh) // stride))
                    oh1 = min(Ho, (H - 1 + padding - kh) // stride + 1)
                    for kw in range(K):
                        wv = w[co, ci, kh, kw]
                        ow0 = max(0, -(-(padding - kw) // stride))
                        ow1 = min(Wo, (W - 1 + padding - kw) // stride + 1)
                        base = kw - padding
                        for oh in range(oh0, oh1):
                            ih = oh * stride + kh - padding
                            xrow = x[n, ci, ih]
                            orow = out[n, co, oh]
                            for ow in range(ow0, ow1):
                                orow[ow] += wv * xrow[ow * stride + base]


@njit(cache=True)
def _conv2d_input_grad_jit(dy, w, stride, padding, dx):
    N, Co, Ho, Wo = dy.shape
    Ci = w.shape[1]
    K = w.shape[2]
    H = dx.shape[2]
    W = dx.shape[3]
    dx[:, :, :, :] = 0.0
    for n in range(N):
        for co in range(Co):
            for ci in range(Ci):
                for kh in range(K):
                    oh0 = max(0, -(-(padding - kh) // stride))
                    oh1 = min(Ho, (H - 1 + padding - kh) // stride + 1)
                    for kw in range(K):
                        wv = w[co, ci, kh, kw]
                        ow0 = max(0, -(-(padding - kw) // stride))
                        ow1 = min(Wo, (W - 1 + padding - kw) // stride + 1)
                        base = kw - padding
                        for oh in range(oh0, oh1):
                            ih = oh * stride + kh - padding
                            gyrow = dy[n, co, oh]
                            dxrow = dx[n, ci, ih]
                            for ow in range(ow0, ow1):
                                dxrow[ow * stride + base] += wv * gyrow[ow]


@njit(cache=True)
def _conv2d_weight_grad_jit(dy, x, stride, padding, dw):
    N, Co, Ho, Wo = dy.shape
    Ci = x.shape[1]
    K = dw.shape[2]
    H = x.shape[2]
    W = x.shape[3]
    for co in range(Co):
        for ci in range(Ci):
            for kh in range(K):
                oh0 = max(0, -(-(padding - kh) // stride))
                oh1 = min(Ho, (H - 1 + padding - kh) // stride + 1)
                for kw in range(K):
                    ow0 = max(0, -(-(padding - kw) // stride))
                    ow1 = min(Wo, (W - 1 + padding - kw) // stride + 1)
                    base = kw - padding
                    acc = 0.0
                    for n in range(N):
                        for oh in range(oh0, oh1):
                            ih = oh * stride + kh - padding
                            gyrow = dy[n, co, oh]
                            xrow = x[n, ci, ih]
                            for ow in range(ow0, ow1):
                                acc += gyrow[ow] * xrow[ow * stride + base]
                    dw[co, ci, kh, kw] = acc


# ---------------------------------------------------------------------------
# numpy fallback (K*K strided slices contracted via BLAS)
# ---------------------------------------------------------------------------

def _pad_hw(x, padding):
    if padding == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))


def _conv2d_forward_np(x, w, b, stride, padding, out):
    Co, _, K, _ = w.shape
    Ho, Wo = out.shape[2], out.shape[3]
    xp = _pad_hw(x, padding)
    out[:] = b.reshape(1, Co, 1, 1)
    for kh in range(K):
        for kw in range(K):
            xs = xp[:, :, kh:kh + stride * (Ho - 1) + 1:stride,
                    kw:kw + stride * (Wo - 1) + 1:stride]
            out += np.moveaxis(np.tensordot(w[:, :, kh, kw], xs, axes=(1, 1)), 1, 0)


def _conv2d_input_grad_np(dy, w, stride, padding, dx):
    _, _, Ho, Wo = dy.shape
    K = w.shape[2]
    H, W = dx.shape[2], dx.shape[3]
    dxp = np.zeros((dx.shape[0], dx.shape[1], H + 2 * padding, W + 2 * padding),
                   dtype=dy.dtype)
    for kh in range(K):
        for kw in range(K):
            g = np.moveaxis(np.tensordot(dy, w[:, :, kh, kw], axes=(1, 0)), 3, 1)
            dxp[:, :, kh:kh + stride * (Ho - 1) + 1:stride,
                kw:kw + stride * (Wo - 1) + 1:stride] += g
    dx[:] = dxp[:, :, padding:padding + H, padding:padding + W]


def _conv2d_weight_grad_np(dy, x, stride, padding, dw):
    _, _, Ho, Wo = dy.shape
    K = dw.shape[2]
    xp = _pad_hw(x, padding)
    for kh in range(K):
        for kw in range(K):
            xs = xp[:, :, kh:kh + stride * (Ho - 1) + 1:stride,
                    kw:kw + stride * (Wo - 1) + 1:stride]
            dw[:, :, kh, kw] = np.tensordot(dy, xs, axes=([0, 2, 3], [0, 2, 3]))


# ---------------------------------------------------------------------------
# public dispatch
# ---------------------------------------------------------------------------

def conv2d_out_hw(h: int, w: int, k: int, stride: int, padding: int) -> tuple[int, int]:
    return ((h + 2 * padding - k) // stride + 1,
            (w + 2 * padding - k) // stride + 1)


def conv_transpose2d_out_hw(h: int, w: int, k: int, stride: int,
                            padding: int) -> tuple[int, int]:
    return ((h - 1) * stride - 2 * padding + k,
            (w - 1) * stride - 2 * padding + k)


def conv2d_forward(x, w, b, stride, padding):
    """Cross-correlation of x[N,Ci,H,W] with w[Co,Ci,K,K] plus bias b[Co]."""
    ho, wo = conv2d_out_hw(x.shape[2], x.shape[3], w.shape[2], stride, padding)
    out = np.empty((x.shape[0], w.shape[0], ho, wo), dtype=x.dtype)
    if JIT_ENABLED:
        _conv2d_forward_jit(x, w, b, stride, padding, out)
    else:
        _conv2d_forward_np(x, w, b, stride, padding, out)
    return out


def conv2d_input_grad(dy, w, stride, padding, in_h, in_w):
    """Scatter dy[N,Co,Ho,Wo] back through w to an input of spatial size (in_h, in_w).

    Also serves as the transposed-convolution forward pass when w is read
    as [Cin, Cout, K, K] and dy is the transposed conv's input.
    """
    dx = np.empty((dy.shape[0], w.shape[1], in_h, in_w), dtype=dy.dtype)
    if JIT_ENABLED:
        _conv2d_input_grad_jit(dy, w, stride, padding, dx)
    else:
        _conv2d_input_grad_np(dy, w, stride, padding, dx)
    return dx


def conv2d_weight_grad(dy, x, stride, padding, k):
    """Accumulate d(loss)/d(weight) for conv2d: correlate dy with x patches."""
    dw = np.empty((dy.shape[1], x.shape[1], k, k), dtype=dy.dtype)
    if JIT_ENABLED:
        _conv2d_weight_grad_jit(dy, x, stride, padding, dw)
    else:
        _conv2d_weight_grad_np(dy, x, stride, padding, dw)
    return dw
