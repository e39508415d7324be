"""Image directory ingestion for training and evaluation.

Only binary PPM (P6) files are consumed. Each image is center-cropped to
the largest square, nearest-neighbor resized to the target size, and
scaled to [0,1] float32, shape [3,S,S].
"""

from __future__ import annotations

import os

import numpy as np

from .errors import DatasetError
from .netpbm import read_ppm


def _nn_resize(img: np.ndarray, size: int) -> np.ndarray:
    _, h, w = img.shape
    if h == size and w == size:
        return img
    # sample source pixel centers
    rows = np.minimum((np.arange(size) + 0.5) * h / size, h - 1).astype(np.int64)
    cols = np.minimum((np.arange(size) + 0.5) * w / size, w - 1).astype(np.int64)
    return img[:, rows[:, None], cols[None, :]]


def center_square(img: np.ndarray) -> np.ndarray:
    """Largest centered square crop of a [C,H,W] image."""
    _, h, w = img.shape
    side = min(h, w)
    top = (h - side) // 2
    left = (w - side) // 2
    return img[:, top:top + side, left:left + side]


def list_images(dir_path: str | os.PathLike) -> list[str]:
    """Sorted absolute paths of the .ppm files in a directory."""
    dir_path = os.fspath(dir_path)
    if not os.path.isdir(dir_path):
        raise DatasetError(f"dataset directory {dir_path!r} does not exist")
    names = sorted(n for n in os.listdir(dir_path)
                   if n.lower().endswith(".ppm"))
    if not names:
        raise DatasetError(f"no .ppm images found in {dir_path!r}")
    return [os.path.join(dir_path, n) for n in names]


def load_image(path: str | os.PathLike, target_size: int) -> np.ndarray:
    """One PPM -> [3,S,S] float32 in [0,1]."""
    img = read_ppm(path)
    return np.ascontiguousarray(_nn_resize(center_square(img), target_size))


def load_dataset(dir_path: str | os.PathLike,
                 target_size: int) -> tuple[list[str], list[np.ndarray]]:
    """All PPMs in a directory, sorted by name.

    Returns (paths, images) so callers can pair images with their mask
    manifests by file stem.
    """
    if target_size < 1:
        raise DatasetError(f"target_size must be positive, got {target_size}")
    paths = list_images(dir_path)
    return paths, [load_image(p, target_size) for p in paths]
