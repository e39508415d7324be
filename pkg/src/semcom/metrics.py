"""Reconstruction quality and rate metrics."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import MaskError, ShapeError


@dataclass(frozen=True)
class PsnrResult:
    """Peak signal-to-noise ratio together with the MSE it was derived from."""

    value_db: float
    mse: float
    max_val: float


def psnr(reference: np.ndarray, test: np.ndarray, max_val: float = 1.0) -> PsnrResult:
    """PSNR in dB over all elements; identical arrays give +inf."""
    if reference.shape != test.shape:
        raise ShapeError(
            f"psnr shapes differ: {reference.shape} vs {test.shape}")
    diff = reference.astype(np.float64) - test.astype(np.float64)
    mse = float(np.mean(np.square(diff)))
    if mse == 0.0:
        return PsnrResult(float("inf"), 0.0, max_val)
    value = 10.0 * np.log10(max_val * max_val / mse)
    return PsnrResult(float(value), mse, max_val)


def psnr_masked(reference: np.ndarray, test: np.ndarray, mask: np.ndarray,
                max_val: float = 1.0) -> PsnrResult:
    """PSNR restricted to pixels where ``mask`` is nonzero.

    ``reference``/``test`` are [C,H,W]; ``mask`` is [H,W] and is applied to
    every channel. The MSE denominator counts only selected pixels.
    """
    if reference.shape != test.shape:
        raise ShapeError(
            f"psnr_masked shapes differ: {reference.shape} vs {test.shape}")
    if reference.ndim != 3:
        raise ShapeError(
            f"psnr_masked expects [C,H,W] images, got shape {reference.shape}")
    # accept a Mask object or a bare [H,W] array
    grid = mask if isinstance(mask, np.ndarray) else np.asarray(mask.data)
    if grid.shape != reference.shape[1:]:
        raise ShapeError(
            f"mask shape {grid.shape} does not match image plane "
            f"{reference.shape[1:]}")
    sel = grid != 0
    if not sel.any():
        raise MaskError("mask selects no pixels")
    diff = reference.astype(np.float64) - test.astype(np.float64)
    mse = float(np.mean(np.square(diff[:, sel])))
    if mse == 0.0:
        return PsnrResult(float("inf"), 0.0, max_val)
    value = 10.0 * np.log10(max_val * max_val / mse)
    return PsnrResult(float(value), mse, max_val)


def compression_ratio(in_shape: tuple[int, int, int],
                      out_shape: tuple[int, int, int]) -> Fraction:
    """Exact rational ratio of latent element count to input element count."""
    if len(in_shape) != 3 or len(out_shape) != 3:
        raise ShapeError(
            f"expected [C,H,W] shapes, got {in_shape} and {out_shape}")
    if any(d < 1 for d in in_shape) or any(d < 1 for d in out_shape):
        raise ShapeError(
            f"shape dims must be positive, got {in_shape} and {out_shape}")
    num = out_shape[0] * out_shape[1] * out_shape[2]
    den = in_shape[0] * in_shape[1] * in_shape[2]
    return Fraction(num, den)
