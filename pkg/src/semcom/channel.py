"""Noisy channel models: identity, AWGN, and flat Rayleigh fading.

SNR is specified in dB relative to the measured power of the transmitted
signal, so callers need not pre-normalize. Noise is drawn in float64 and
cast to the signal dtype; given the same generator seed the realization
is reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateSignalError, ShapeError
from .tensor import Tensor, _active_tape

KINDS = ("identity", "awgn", "rayleigh")


@dataclass(frozen=True)
class ChannelSpec:
    """Channel kind plus operating point.

    ``snr_db`` is ignored by the identity channel. ``equalize`` only
    affects Rayleigh: when True the receiver divides by the (perfectly
    known) per-item gain. ``seed`` is the default entropy source when no
    explicit generator is handed to transmit().
    """

    kind: str
    snr_db: float = 0.0
    equalize: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"channel kind must be one of {KINDS}, "
                              f"got {self.kind!r}")
        if not math.isfinite(self.snr_db):
            raise ConfigError(f"snr_db must be finite, got {self.snr_db}")


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator; the single entropy source for channel draws."""
    return np.random.Generator(np.random.PCG64(seed))


def _signal_power(x: np.ndarray) -> float:
    p = float(np.mean(np.square(x, dtype=np.float64)))
    if p == 0.0:
        raise DegenerateSignalError("signal has zero power; SNR is undefined")
    return p


def _noise_sigma(x: np.ndarray, snr_db: float) -> float:
    return math.sqrt(_signal_power(x) / 10.0 ** (snr_db / 10.0))


def awgn(x: np.ndarray, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """Add white Gaussian noise at the requested SNR."""
    sigma = _noise_sigma(x, snr_db)
    noise = rng.standard_normal(x.shape) * sigma
    return x + noise.astype(x.dtype)


def rayleigh_gains(n: int, rng: np.random.Generator) -> np.ndarray:
    """n unit-mean-square Rayleigh amplitudes: sqrt((g1^2 + g2^2) / 2)."""
    g = rng.standard_normal((2, n))
    return np.sqrt((g[0] * g[0] + g[1] * g[1]) / 2.0)


def rayleigh(x: np.ndarray, snr_db: float, rng: np.random.Generator,
             equalize: bool = True) -> np.ndarray:
    """Block fading: one gain per leading-axis item, then AWGN.

    The gain vector is drawn before the noise so one generator seed pins
    both. With ``equalize`` the receiver divides by the known gain.
    """
    if x.ndim < 2:
        raise ShapeError(
            f"rayleigh expects batched [N,...] input, got shape {x.shape}")
    sigma = _noise_sigma(x, snr_db)
    h = rayleigh_gains(x.shape[0], rng)
    noise = rng.standard_normal(x.shape) * sigma
    hb = h.reshape((-1,) + (1,) * (x.ndim - 1))
    y = hb * x.astype(np.float64) + noise
    if equalize:
        y = y / hb
    return y.astype(x.dtype)


def transmit(x: np.ndarray, spec: ChannelSpec,
             rng: np.random.Generator | None = None) -> np.ndarray:
    """Pass a signal through the channel described by ``spec``.

    Without an explicit generator a fresh one is seeded from spec.seed,
    so equal (x, spec) pairs give bit-identical outputs.
    """
    if rng is None:
        rng = make_rng(spec.seed)
    if spec.kind == "identity":
        return x
    if spec.kind == "awgn":
        return awgn(x, spec.snr_db, rng)
    return rayleigh(x, spec.snr_db, rng, equalize=spec.equalize)


def transmit_tensor(t: Tensor, spec: ChannelSpec,
                    rng: np.random.Generator | None = None) -> Tensor:
    """Taped channel pass for training graphs.

    The realized noise (and gain, when equalized) is treated as a constant:
    gradients flow through the signal path only.
    """
    if rng is None:
        rng = make_rng(spec.seed)
    xd = t.data
    scale = None
    if spec.kind == "identity":
        y = xd
    elif spec.kind == "awgn":
        y = awgn(xd, spec.snr_db, rng)
    else:
        if xd.ndim < 2:
            raise ShapeError(
                f"rayleigh expects batched [N,...] input, got shape {xd.shape}")
        sigma = _noise_sigma(xd, spec.snr_db)
        h = rayleigh_gains(xd.shape[0], rng)
        noise = rng.standard_normal(xd.shape) * sigma
        hb = h.reshape((-1,) + (1,) * (xd.ndim - 1))
        yf = hb * xd.astype(np.float64) + noise
        if spec.equalize:
            y = (yf / hb).astype(xd.dtype)
        else:
            y = yf.astype(xd.dtype)
            scale = hb.astype(xd.dtype)

    out = Tensor(y)
    tape = _active_tape()
    if tape is not None and tape._watches(t):
        def vjp(g):
            return (g if scale is None else g * scale,)

        tape.record(out, (t,), vjp)
    return out


def measure_snr(x: np.ndarray, y: np.ndarray) -> float:
    """Empirical SNR in dB of y against reference x; equal arrays give +inf."""
    if x.shape != y.shape:
        raise ShapeError(f"measure_snr shapes differ: {x.shape} vs {y.shape}")
    sig = float(np.sum(np.square(x, dtype=np.float64)))
    err = float(np.sum(np.square(y.astype(np.float64) - x.astype(np.float64))))
    if err == 0.0:
        return float("inf")
    if sig == 0.0:
        raise DegenerateSignalError("reference signal has zero power")
    return 10.0 * math.log10(sig / err)
