"""Binary netpbm readers/writers (P6 color, P5 grayscale).

Only 8-bit rasters (maxval <= 255) are supported. Headers may contain
``#`` comments anywhere whitespace is allowed, per the format spec.
Color images cross the API as [3,H,W] float32 in [0,1]; grayscale as
[H,W] uint8.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import NetpbmError, ShapeError


def _parse_header(buf: bytes, path: str, magic: bytes) -> tuple[int, int, int, int]:
    """Return (width, height, maxval, raster_offset)."""
    if not buf.startswith(magic):
        got = buf[:2]
        raise NetpbmError(f"{path}: expected {magic.decode()} magic, got {got!r}")
    pos = len(magic)
    fields: list[int] = []
    n = len(buf)
    while len(fields) < 3:
        while pos < n and buf[pos:pos + 1].isspace():
            pos += 1
        if pos < n and buf[pos] == ord("#"):
            eol = buf.find(b"\n", pos)
            if eol == -1:
                raise NetpbmError(f"{path}: unterminated comment in header")
            pos = eol + 1
            continue
        start = pos
        while pos < n and not buf[pos:pos + 1].isspace():
            pos += 1
        token = buf[start:pos]
        if not token:
            raise NetpbmError(f"{path}: truncated header")
        try:
            fields.append(int(token))
        except ValueError:
            raise NetpbmError(f"{path}: bad header token {token!r}") from None
    if pos >= n:
        raise NetpbmError(f"{path}: missing raster")
    pos += 1  # single whitespace byte after maxval
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise NetpbmError(f"{path}: bad dimensions {width}x{height}")
    if not 0 < maxval <= 255:
        raise NetpbmError(f"{path}: maxval {maxval} unsupported (need 1..255)")
    return width, height, maxval, pos


def read_ppm(path: str | os.PathLike) -> np.ndarray:
    """Read a binary PPM into [3,H,W] float32 scaled to [0,1]."""
    path = os.fspath(path)
    with open(path, "rb") as f:
        buf = f.read()
    width, height, maxval, pos = _parse_header(buf, path, b"P6")
    need = width * height * 3
    raster = np.frombuffer(buf, dtype=np.uint8, count=-1, offset=pos)
    if raster.size < need:
        raise NetpbmError(
            f"{path}: raster truncated, expected {need} bytes, got {raster.size}")
    img = raster[:need].reshape(height, width, 3).transpose(2, 0, 1)
    return img.astype(np.float32) / np.float32(maxval)


def write_ppm(path: str | os.PathLike, image: np.ndarray) -> None:
    """Write [3,H,W] float values in [0,1] as a maxval-255 binary PPM."""
    if image.ndim != 3 or image.shape[0] != 3:
        raise ShapeError(f"expected [3,H,W] image, got shape {image.shape}")
    data = np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)
    raster = np.rint(data * 255.0).astype(np.uint8).transpose(1, 2, 0)
    h, w = raster.shape[:2]
    with open(os.fspath(path), "wb") as f:
        f.write(b"P6\n%d %d\n255\n" % (w, h))
        f.write(raster.tobytes())


def read_pgm(path: str | os.PathLike) -> np.ndarray:
    """Read a binary PGM into [H,W] uint8 (values rescaled to 0..255)."""
    path = os.fspath(path)
    with open(path, "rb") as f:
        buf = f.read()
    width, height, maxval, pos = _parse_header(buf, path, b"P5")
    need = width * height
    raster = np.frombuffer(buf, dtype=np.uint8, count=-1, offset=pos)
    if raster.size < need:
        raise NetpbmError(
            f"{path}: raster truncated, expected {need} bytes, got {raster.size}")
    gray = raster[:need].reshape(height, width)
    if maxval != 255:
        gray = np.rint(gray.astype(np.float64) * (255.0 / maxval)).astype(np.uint8)
    return gray.copy()


def write_pgm(path: str | os.PathLike, gray: np.ndarray) -> None:
    """Write [H,W] uint8 values as a maxval-255 binary PGM."""
    arr = np.asarray(gray)
    if arr.ndim != 2:
        raise ShapeError(f"expected [H,W] grayscale, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        raise ShapeError(f"expected uint8 grayscale, got dtype {arr.dtype}")
    h, w = arr.shape
    with open(os.fspath(path), "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (w, h))
        f.write(arr.tobytes())
