"""Minimal binary netpbm I/O: P6 in, P5 out.

These are the exchange formats of the transmission harness; this
package writes the files, the harness reads them. No shared code, the
formats themselves are the contract.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import FormatError


def _header_tokens(data: bytes, path: str, n: int) -> tuple[list[int], int]:
    pos = 2  # past magic
    tokens: list[int] = []
    while len(tokens) < n:
        while pos < len(data) and data[pos] in b" \t\r\n":
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] not in b"\r\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and data[pos] not in b" \t\r\n":
            pos += 1
        if start == pos:
            raise FormatError(f"{path}: truncated header")
        try:
            tokens.append(int(data[start:pos]))
        except ValueError:
            raise FormatError(f"{path}: bad header token "
                              f"{data[start:pos]!r}") from None
    return tokens, pos + 1  # single whitespace after maxval


def read_ppm(path: str | os.PathLike) -> np.ndarray:
    """Binary P6 file -> [H,W,3] uint8."""
    path = os.fspath(path)
    with open(path, "rb") as f:
        data = f.read()
    if data[:2] != b"P6":
        raise FormatError(f"{path}: not a binary PPM (magic {data[:2]!r})")
    (w, h, maxval), start = _header_tokens(data, path, 3)
    if not 1 <= maxval <= 255:
        raise FormatError(f"{path}: unsupported maxval {maxval}")
    need = w * h * 3
    raster = data[start:start + need]
    if len(raster) < need:
        raise FormatError(f"{path}: raster truncated "
                          f"({len(raster)} of {need} bytes)")
    img = np.frombuffer(raster, dtype=np.uint8).reshape(h, w, 3)
    if maxval != 255:
        img = (img.astype(np.float32) * (255.0 / maxval)).round().astype(np.uint8)
    return img


def write_pgm(path: str | os.PathLike, gray: np.ndarray) -> None:
    """[H,W] uint8 -> binary P5 file."""
    if gray.ndim != 2 or gray.dtype != np.uint8:
        raise FormatError(f"PGM output needs [H,W] uint8, got "
                          f"{gray.shape} {gray.dtype}")
    h, w = gray.shape
    with open(os.fspath(path), "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(np.ascontiguousarray(gray).tobytes())
