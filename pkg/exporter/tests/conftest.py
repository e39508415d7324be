"""Shared fixtures: three synthetic sample images as binary PPM files."""

import numpy as np
import pytest


def write_p6(path, img):
    # img is [H,W,3] uint8
    h, w, _ = img.shape
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        f.write(np.ascontiguousarray(img).tobytes())


def disk_image(size=64):
    """Bright red disk on a dark background."""
    img = np.full((size, size, 3), 20, dtype=np.uint8)
    yy, xx = np.mgrid[:size, :size]
    inside = (yy - size // 2) ** 2 + (xx - size // 2) ** 2 <= (size // 4) ** 2
    img[inside] = (220, 60, 60)
    return img


def rects_image(size=64):
    """Two bright rectangles of different sizes on pure black."""
    img = np.zeros((size, size, 3), dtype=np.uint8)
    img[8:24, 8:40] = (230, 230, 90)
    img[40:56, 44:60] = (90, 200, 230)
    return img


def grad_image(size=64):
    """Horizontal gradient background with one bright square."""
    img = np.zeros((size, size, 3), dtype=np.uint8)
    ramp = np.linspace(10, 90, size).astype(np.uint8)
    img[:] = ramp[None, :, None]
    img[20:44, 20:44] = (240, 240, 240)
    return img


@pytest.fixture(scope="session")
def sample_images(tmp_path_factory):
    d = tmp_path_factory.mktemp("samples")
    write_p6(d / "disk.ppm", disk_image())
    write_p6(d / "rects.ppm", rects_image())
    write_p6(d / "grad.ppm", grad_image())
    return d
