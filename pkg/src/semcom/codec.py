"""Convolutional autoencoder codec: config, model, checkpoints.

The encoder downsamples an image to a compact feature tensor; the decoder
mirrors it back with transposed convolutions and a final sigmoid. The
default geometry maps 3x512x512 images to 128x32x32 features (a 1/6
element-count ratio, i.e. 83.3% fewer values on the air).

Checkpoints are a little-endian binary format, stable across platforms:

    magic "SCJC" | u32 version | u32 json_len | config JSON (utf-8)
    | u32 param_count | records

    record = u32 name_len | name utf-8 | u32 rank | u32 dims[rank]
             | float32 data (row-major)
"""

from __future__ import annotations

import io
import json
import os
import struct
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import CheckpointError, ConfigError, DegenerateSignalError, ShapeError
from .tensor import Parameter, Tensor, activation, conv2d, conv_transpose2d, _active_tape

MAGIC = b"SCJC"
VERSION = 1


@dataclass(frozen=True)
class CodecConfig:
    """Geometry and per-stage hyperparameters of the autoencoder.

    ``channels`` are the encoder stage output widths; the last entry is
    the feature channel count. The decoder mirrors the stages in reverse.
    """

    in_shape: tuple[int, int, int] = (3, 512, 512)
    feature_shape: tuple[int, int, int] = (128, 32, 32)
    channels: tuple[int, ...] = (32, 64, 128, 128)
    kernels: tuple[int, ...] = (4, 4, 4, 4)
    strides: tuple[int, ...] = (2, 2, 2, 2)
    paddings: tuple[int, ...] = (1, 1, 1, 1)
    activation: str = "leaky_relu"
    slope: float = 0.2

    def __post_init__(self):
        n = len(self.channels)
        if n == 0:
            raise ConfigError("codec needs at least one stage")
        if not (len(self.kernels) == len(self.strides) == len(self.paddings) == n):
            raise ConfigError(
                "channels, kernels, strides, paddings must have equal length, "
                f"got {n}, {len(self.kernels)}, {len(self.strides)}, "
                f"{len(self.paddings)}")
        if len(self.in_shape) != 3 or len(self.feature_shape) != 3:
            raise ConfigError("in_shape and feature_shape must be [C,H,W]")
        if any(d < 1 for d in self.in_shape + self.feature_shape):
            raise ConfigError("shape entries must be positive")
        if self.channels[-1] != self.feature_shape[0]:
            raise ConfigError(
                f"last stage width {self.channels[-1]} must equal feature "
                f"channel count {self.feature_shape[0]}")
        if self.activation not in ("relu", "leaky_relu"):
            raise ConfigError(
                f"hidden activation must be relu or leaky_relu, "
                f"got {self.activation!r}")
        h, w = self.in_shape[1], self.in_shape[2]
        for i, (k, s, p) in enumerate(zip(self.kernels, self.strides,
                                          self.paddings)):
            # exact invertibility by the mirrored transpose stage
            if (h + 2 * p - k) % s != 0 or (w + 2 * p - k) % s != 0:
                raise ConfigError(
                    f"stage {i}: {h}x{w} with k={k} s={s} p={p} does not "
                    f"divide evenly; the decoder could not restore the size")
            h, w = kernels.conv2d_out_hw(h, w, k, s, p)
            if h < 1 or w < 1:
                raise ConfigError(f"stage {i} collapses the image to {h}x{w}")
        if (h, w) != self.feature_shape[1:]:
            raise ConfigError(
                f"stages map {self.in_shape[1]}x{self.in_shape[2]} to {h}x{w} "
                f"but feature_shape declares {self.feature_shape[1]}x"
                f"{self.feature_shape[2]}")

    def to_json(self) -> str:
        doc = {
            "in_shape": list(self.in_shape),
            "feature_shape": list(self.feature_shape),
            "channels": list(self.channels),
            "kernels": list(self.kernels),
            "strides": list(self.strides),
            "paddings": list(self.paddings),
            "activation": self.activation,
            "slope": self.slope,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "CodecConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid codec config JSON: {e}") from None
        try:
            return cls(
                in_shape=tuple(doc["in_shape"]),
                feature_shape=tuple(doc["feature_shape"]),
                channels=tuple(doc["channels"]),
                kernels=tuple(doc["kernels"]),
                strides=tuple(doc["strides"]),
                paddings=tuple(doc["paddings"]),
                activation=str(doc["activation"]),
                slope=float(doc["slope"]),
            )
        except KeyError as e:
            raise ConfigError(f"codec config JSON missing field {e}") from None


def default_config() -> CodecConfig:
    return CodecConfig()


def toy_config(size: int = 64) -> CodecConfig:
    """Same four-stage stack on a small square image (size divisible by 16)."""
    if size % 16 != 0:
        raise ConfigError(f"toy size must be divisible by 16, got {size}")
    return CodecConfig(in_shape=(3, size, size),
                       feature_shape=(128, size // 16, size // 16))


class _Stage:
    __slots__ = ("weight", "bias", "stride", "padding", "transpose")

    def __init__(self, weight: Parameter, bias: Parameter, stride: int,
                 padding: int, transpose: bool):
        self.weight = weight
        self.bias = bias
        self.stride = stride
        self.padding = padding
        self.transpose = transpose

    def __call__(self, x: Tensor) -> Tensor:
        if self.transpose:
            return conv_transpose2d(x, self.weight, self.bias,
                                    self.stride, self.padding)
        return conv2d(x, self.weight, self.bias, self.stride, self.padding)


class CodecModel:
    """Paired encoder/decoder stacks over a shared parameter list."""

    def __init__(self, config: CodecConfig, encoder: list[_Stage],
                 decoder: list[_Stage]):
        self.config = config
        self.encoder = encoder
        self.decoder = decoder

    def parameters(self) -> list[Parameter]:
        out = []
        for st in self.encoder + self.decoder:
            out.append(st.weight)
            out.append(st.bias)
        return out

    def _check_input(self, x: Tensor, shape: tuple[int, int, int], what: str):
        if x.data.ndim != 4 or x.shape[1:] != shape:
            raise ShapeError(
                f"{what} expects [N,{shape[0]},{shape[1]},{shape[2]}], "
                f"got {x.shape}")

    def encode(self, x: Tensor) -> Tensor:
        """Image batch -> feature batch (no normalization applied here)."""
        self._check_input(x, self.config.in_shape, "encode")
        act = self.config.activation
        for i, st in enumerate(self.encoder):
            x = st(x)
            if i + 1 < len(self.encoder):
                x = activation(x, act, slope=self.config.slope)
        return x

    def decode(self, y: Tensor) -> Tensor:
        """Feature batch -> image batch with values strictly inside (0,1)."""
        self._check_input(y, self.config.feature_shape, "decode")
        act = self.config.activation
        for i, st in enumerate(self.decoder):
            y = st(y)
            if i + 1 < len(self.decoder):
                y = activation(y, act, slope=self.config.slope)
        return activation(y, "sigmoid")


def build_codec(config: CodecConfig, seed: int) -> CodecModel:
    """Construct a model with seeded uniform fan-in initialization.

    Every weight and bias draws from U(-b, b) with b = 1/sqrt(Cin * K * K)
    of its stage, in a fixed order, so one seed pins every parameter.
    """
    rng = np.random.Generator(np.random.PCG64(seed))

    def draw(name: str, shape: tuple[int, ...], fan_in: int) -> Parameter:
        bound = float(np.sqrt(1.0 / fan_in))
        data = rng.uniform(-bound, bound, size=shape).astype(np.float32)
        return Parameter(name, data)

    encoder = []
    c_prev = config.in_shape[0]
    for i, (c_out, k, s, p) in enumerate(zip(config.channels, config.kernels,
                                             config.strides, config.paddings)):
        fan = c_prev * k * k
        w = draw(f"enc{i}.weight", (c_out, c_prev, k, k), fan)
        b = draw(f"enc{i}.bias", (c_out,), fan)
        encoder.append(_Stage(w, b, s, p, transpose=False))
        c_prev = c_out

    dec_widths = tuple(reversed(config.channels[:-1])) + (config.in_shape[0],)
    decoder = []
    for i, (c_out, k, s, p) in enumerate(zip(dec_widths,
                                             reversed(config.kernels),
                                             reversed(config.strides),
                                             reversed(config.paddings))):
        fan = c_prev * k * k
        w = draw(f"dec{i}.weight", (c_prev, c_out, k, k), fan)
        b = draw(f"dec{i}.bias", (c_out,), fan)
        decoder.append(_Stage(w, b, s, p, transpose=True))
        c_prev = c_out

    return CodecModel(config, encoder, decoder)


def power_normalize(x: Tensor, per_item: bool = False) -> Tensor:
    """Rescale so the mean squared value is exactly 1.

    Default scales the whole tensor by sqrt(K / sum(x^2)). With
    ``per_item`` each leading-axis slice is normalized independently,
    which keeps single-image evaluation consistent with batched training.
    Differentiable; recorded on the active tape.
    """
    xd = x.data
    if per_item:
        if xd.ndim < 2:
            raise ShapeError(
                f"per_item normalization needs [N,...] input, got {xd.shape}")
        axes = tuple(range(1, xd.ndim))
        k = float(np.prod(xd.shape[1:]))
        s = np.sum(np.square(xd, dtype=np.float64), axis=axes, keepdims=True)
        if (s == 0.0).any():
            raise DegenerateSignalError(
                "power_normalize: an all-zero item cannot be normalized")
    else:
        k = float(xd.size)
        s = np.sum(np.square(xd, dtype=np.float64))
        if s == 0.0:
            raise DegenerateSignalError(
                "power_normalize: all-zero input cannot be normalized")
    c = np.sqrt(k / s)
    out = Tensor((xd.astype(np.float64) * c).astype(xd.dtype))

    tape = _active_tape()
    if tape is not None and tape._watches(x):
        def vjp(g):
            gd = g.astype(np.float64)
            xf = xd.astype(np.float64)
            if per_item:
                dot = np.sum(xf * gd, axis=axes, keepdims=True)
            else:
                dot = np.sum(xf * gd)
            return ((c * (gd - xf * (dot / s))).astype(xd.dtype),)

        tape.record(out, (x,), vjp)
    return out


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

def save_checkpoint(model: CodecModel, path: str | os.PathLike) -> None:
    """Serialize config and every parameter to the SCJC binary format."""
    params = model.parameters()
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<I", VERSION))
    cfg = model.config.to_json().encode("utf-8")
    buf.write(struct.pack("<I", len(cfg)))
    buf.write(cfg)
    buf.write(struct.pack("<I", len(params)))
    for p in params:
        name = p.name.encode("utf-8")
        buf.write(struct.pack("<I", len(name)))
        buf.write(name)
        buf.write(struct.pack("<I", p.data.ndim))
        for d in p.data.shape:
            buf.write(struct.pack("<I", d))
        buf.write(np.ascontiguousarray(p.data, dtype="<f4").tobytes())
    with open(os.fspath(path), "wb") as f:
        f.write(buf.getvalue())


class _Reader:
    def __init__(self, data: bytes, path: str):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CheckpointError(
                f"{self.path}: truncated checkpoint (wanted {n} bytes at "
                f"offset {self.pos}, file has {len(self.data)})")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]


def load_checkpoint(path: str | os.PathLike) -> CodecModel:
    """Rebuild a model from an SCJC file; parameters load bit-exactly."""
    path = os.fspath(path)
    with open(path, "rb") as f:
        r = _Reader(f.read(), path)
    if r.take(4) != MAGIC:
        raise CheckpointError(f"{path}: bad magic, not a codec checkpoint")
    version = r.u32()
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported version {version}")
    cfg_len = r.u32()
    try:
        config = CodecConfig.from_json(r.take(cfg_len).decode("utf-8"))
    except ConfigError as e:
        raise CheckpointError(f"{path}: {e}") from None

    model = build_codec(config, seed=0)
    by_name = {p.name: p for p in model.parameters()}
    count = r.u32()
    if count != len(by_name):
        raise CheckpointError(
            f"{path}: header declares {count} parameters but the config "
            f"implies {len(by_name)}")
    loaded = {}
    for _ in range(count):
        nlen = r.u32()
        name = r.take(nlen).decode("utf-8")
        rank = r.u32()
        dims = tuple(r.u32() for _ in range(rank))
        n_elem = int(np.prod(dims)) if dims else 1
        raw = r.take(4 * n_elem)
        p = by_name.get(name)
        if p is None:
            raise CheckpointError(f"{path}: unknown parameter {name!r}")
        if dims != p.data.shape:
            raise CheckpointError(
                f"{path}: parameter {name!r} has shape {dims} but the config "
                f"implies {p.data.shape}")
        loaded[name] = np.frombuffer(raw, dtype="<f4").reshape(dims)
    if len(loaded) != len(by_name):
        missing = sorted(set(by_name) - set(loaded))
        raise CheckpointError(f"{path}: missing parameters {missing}")
    # all records validated; only now mutate the model
    for name, arr in loaded.items():
        by_name[name].data = arr.astype(np.float32).copy()
        by_name[name].grad = np.zeros_like(by_name[name].data)
    return model
