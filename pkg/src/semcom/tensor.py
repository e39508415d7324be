"""Dense tensors with taped reverse-mode differentiation.

Storage is float32 by default; float64 inputs keep their dtype so
verification code (e.g. finite-difference gradient checks) can run the
same graph at higher precision. Reductions accumulate in float64.

Differentiable ops record themselves on the innermost active ``Tape``.
Evaluation outside any tape does no bookkeeping.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .errors import ConfigError, GraphError, ShapeError

_FLOAT_DTYPES = (np.dtype(np.float32), np.dtype(np.float64))


class Tensor:
    """Immutable-by-convention value holder for arrays flowing through ops."""

    __slots__ = ("data",)

    def __init__(self, data, dtype=None):
        arr = np.asarray(data)
        if dtype is not None:
            arr = arr.astype(dtype, copy=False)
        elif arr.dtype not in _FLOAT_DTYPES:
            arr = arr.astype(np.float32)
        self.data = arr

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype})"


class Parameter(Tensor):
    """Trainable leaf tensor with an accumulated gradient and a unique name."""

    __slots__ = ("grad", "name")

    def __init__(self, name: str, data, dtype=None):
        super().__init__(data, dtype=dtype)
        self.name = name
        self.grad = np.zeros_like(self.data)


class _Record:
    __slots__ = ("out", "inputs", "vjp")

    def __init__(self, out, inputs, vjp):
        self.out = out
        self.inputs = inputs
        self.vjp = vjp


_TAPE_STACK: list["Tape"] = []


def _active_tape():
    return _TAPE_STACK[-1] if _TAPE_STACK else None


class Tape:
    """Execution-ordered record of differentiable ops.

    ``backward`` replays the records in exact reverse execution order,
    accumulating gradients additively; parameters reached more than once
    therefore sum their contributions.
    """

    def __init__(self):
        self._records: list[_Record] = []
        self._watched: set[int] = set()

    def __enter__(self) -> "Tape":
        _TAPE_STACK.append(self)
        return self

    def __exit__(self, *exc):
        _TAPE_STACK.pop()
        return False

    def __len__(self) -> int:
        return len(self._records)

    def _watches(self, t: Tensor) -> bool:
        return isinstance(t, Parameter) or id(t) in self._watched

    def record(self, out: Tensor, inputs, vjp) -> None:
        self._records.append(_Record(out, tuple(inputs), vjp))
        self._watched.add(id(out))

    def backward(self, loss: Tensor) -> None:
        backward(self, loss)


def backward(tape: Tape, loss: Tensor) -> None:
    """Populate parameter gradients with d(loss)/d(parameter).

    ``loss`` must be a scalar produced by an op recorded on ``tape``.
    """
    if not tape._records:
        raise GraphError("tape is empty; nothing to differentiate")
    if loss.size != 1:
        raise GraphError(f"loss must be a scalar, got shape {loss.shape}")
    if not any(rec.out is loss for rec in tape._records):
        raise GraphError("loss was not produced by operations recorded on this tape")

    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for rec in reversed(tape._records):
        g = grads.pop(id(rec.out), None)
        if g is None:
            continue
        for t, gt in zip(rec.inputs, rec.vjp(g)):
            if gt is None:
                continue
            if isinstance(t, Parameter):
                t.grad += gt
            else:
                acc = grads.get(id(t))
                grads[id(t)] = gt if acc is None else acc + gt


# ---------------------------------------------------------------------------
# ops
# ---------------------------------------------------------------------------

def _require_4d(t: Tensor, what: str) -> None:
    if t.data.ndim != 4:
        raise ShapeError(f"{what} must be 4-D [N,C,H,W], got shape {t.shape}")


def conv2d(x: Tensor, weight: Tensor, bias: Tensor, stride: int = 1,
           padding: int = 0) -> Tensor:
    """Strided zero-padded cross-correlation; weight is [Cout, Cin, K, K]."""
    _require_4d(x, "conv2d input")
    _require_4d(weight, "conv2d weight")
    if stride < 1:
        raise ConfigError(f"stride must be >= 1, got {stride}")
    if padding < 0:
        raise ConfigError(f"padding must be >= 0, got {padding}")
    if weight.shape[2] != weight.shape[3]:
        raise ShapeError(f"only square kernels supported, got {weight.shape}")
    if x.shape[1] != weight.shape[1]:
        raise ShapeError(
            f"input has {x.shape[1]} channels but weight expects {weight.shape[1]}")
    if bias.data.ndim != 1 or bias.shape[0] != weight.shape[0]:
        raise ShapeError(
            f"bias must be a vector of length {weight.shape[0]}, got shape {bias.shape}")
    ho, wo = kernels.conv2d_out_hw(x.shape[2], x.shape[3], weight.shape[2],
                                   stride, padding)
    if ho < 1 or wo < 1:
        raise ConfigError(
            f"conv2d output would be {ho}x{wo} for input {x.shape[2]}x{x.shape[3]}, "
            f"kernel {weight.shape[2]}, stride {stride}, padding {padding}")

    out = Tensor(kernels.conv2d_forward(x.data, weight.data, bias.data,
                                        stride, padding))
    tape = _active_tape()
    if tape is not None:
        need = (tape._watches(x), tape._watches(weight), tape._watches(bias))
        if any(need):
            xd, wd = x.data, weight.data
            in_h, in_w, k = x.shape[2], x.shape[3], weight.shape[2]

            def vjp(g):
                dx = (kernels.conv2d_input_grad(g, wd, stride, padding, in_h, in_w)
                      if need[0] else None)
                dw = (kernels.conv2d_weight_grad(g, xd, stride, padding, k)
                      if need[1] else None)
                db = g.sum(axis=(0, 2, 3), dtype=np.float64).astype(g.dtype) \
                    if need[2] else None
                return dx, dw, db

            tape.record(out, (x, weight, bias), vjp)
    return out


def conv_transpose2d(x: Tensor, weight: Tensor, bias: Tensor, stride: int = 1,
                     padding: int = 0) -> Tensor:
    """Transposed convolution; weight is [Cin, Cout, K, K].

    For matching hyperparameters this exactly inverts conv2d's spatial
    downsampling: out = (in - 1) * stride - 2 * padding + K.
    """
    _require_4d(x, "conv_transpose2d input")
    _require_4d(weight, "conv_transpose2d weight")
    if stride < 1:
        raise ConfigError(f"stride must be >= 1, got {stride}")
    if padding < 0:
        raise ConfigError(f"padding must be >= 0, got {padding}")
    if weight.shape[2] != weight.shape[3]:
        raise ShapeError(f"only square kernels supported, got {weight.shape}")
    if x.shape[1] != weight.shape[0]:
        raise ShapeError(
            f"input has {x.shape[1]} channels but weight expects {weight.shape[0]}")
    if bias.data.ndim != 1 or bias.shape[0] != weight.shape[1]:
        raise ShapeError(
            f"bias must be a vector of length {weight.shape[1]}, got shape {bias.shape}")
    ho, wo = kernels.conv_transpose2d_out_hw(x.shape[2], x.shape[3],
                                             weight.shape[2], stride, padding)
    if ho < 1 or wo < 1:
        raise ConfigError(
            f"conv_transpose2d output would be {ho}x{wo} for input "
            f"{x.shape[2]}x{x.shape[3]}, kernel {weight.shape[2]}, "
            f"stride {stride}, padding {padding}")

    # The scatter that computes conv2d's input gradient IS the transposed
    # convolution, with the weight's leading axis matched to x's channels.
    y = kernels.conv2d_input_grad(x.data, weight.data, stride, padding, ho, wo)
    y += bias.data.reshape(1, -1, 1, 1)
    out = Tensor(y)

    tape = _active_tape()
    if tape is not None:
        need = (tape._watches(x), tape._watches(weight), tape._watches(bias))
        if any(need):
            xd, wd = x.data, weight.data
            k = weight.shape[2]

            def vjp(g):
                dx = (kernels.conv2d_forward(
                    g, wd, np.zeros(wd.shape[0], dtype=g.dtype), stride, padding)
                    if need[0] else None)
                dw = (kernels.conv2d_weight_grad(xd, g, stride, padding, k)
                      if need[1] else None)
                db = g.sum(axis=(0, 2, 3), dtype=np.float64).astype(g.dtype) \
                    if need[2] else None
                return dx, dw, db

            tape.record(out, (x, weight, bias), vjp)
    return out


_ACTIVATIONS = ("relu", "leaky_relu", "sigmoid")


def activation(x: Tensor, kind: str, slope: float = 0.01) -> Tensor:
    """Elementwise nonlinearity: relu, leaky_relu(slope) or sigmoid."""
    xd = x.data
    if kind == "relu":
        y = np.maximum(xd, 0)
    elif kind == "leaky_relu":
        y = np.where(xd > 0, xd, xd * xd.dtype.type(slope))
    elif kind == "sigmoid":
        with np.errstate(over="ignore"):
            y = 1.0 / (1.0 + np.exp(-xd))
        # float rounding saturates to 0/1 for |x| > ~17; clamp one ulp inside
        # so the output stays strictly inside (0, 1)
        fi = np.finfo(xd.dtype)
        y = np.clip(y.astype(xd.dtype), fi.tiny, np.nextafter(xd.dtype.type(1), 0))
    else:
        raise ConfigError(f"unknown activation kind {kind!r}; expected one of "
                          f"{_ACTIVATIONS}")
    out = Tensor(y)

    tape = _active_tape()
    if tape is not None and tape._watches(x):
        def vjp(g):
            if kind == "relu":
                return (g * (xd > 0),)
            if kind == "leaky_relu":
                return (g * np.where(xd > 0, xd.dtype.type(1), xd.dtype.type(slope)),)
            return (g * (y * (1 - y)),)

        tape.record(out, (x,), vjp)
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise product of equal-shaped tensors."""
    if a.shape != b.shape:
        raise ShapeError(f"mul shapes differ: {a.shape} vs {b.shape}")
    out = Tensor(a.data * b.data)
    tape = _active_tape()
    if tape is not None:
        need = (tape._watches(a), tape._watches(b))
        if any(need):
            ad, bd = a.data, b.data

            def vjp(g):
                return (g * bd if need[0] else None,
                        g * ad if need[1] else None)

            tape.record(out, (a, b), vjp)
    return out


def mse_loss(pred: Tensor, target: Tensor) -> Tensor:
    """Mean over all elements of the squared difference (scalar tensor)."""
    if pred.shape != target.shape:
        raise ShapeError(f"mse_loss shapes differ: {pred.shape} vs {target.shape}")
    diff = pred.data - target.data
    val = np.mean(np.square(diff, dtype=np.float64))
    out = Tensor(np.asarray(val, dtype=pred.dtype))

    tape = _active_tape()
    if tape is not None:
        need = (tape._watches(pred), tape._watches(target))
        if any(need):
            scale = 2.0 / diff.size

            def vjp(g):
                base = (g * scale) * diff
                return (base.astype(pred.dtype) if need[0] else None,
                        (-base).astype(target.dtype) if need[1] else None)

            tape.record(out, (pred, target), vjp)
    return out
