"""Turn one image plus a prompt into mask files and a manifest.

Output layout, consumed by the transmission harness:

    <stem>.masks.json       manifest (image, width, height, prompt, masks)
    <stem>.maskNN.pgm       one binary P5 per mask, values 0 or 255
"""

from __future__ import annotations

import json
import os

import numpy as np

from .errors import EmptyResultError
from .netpbm import read_ppm, write_pgm
from .prompts import PromptSpec

MANIFEST_SUFFIX = ".masks.json"


def binarize(soft: np.ndarray, threshold: float) -> np.ndarray:
    """Soft scores -> {0, 255} uint8 grid."""
    return np.where(soft > threshold, 255, 0).astype(np.uint8)


def export_masks(image_path: str | os.PathLike, prompt: PromptSpec,
                 out_dir: str | os.PathLike, backend=None) -> str:
    """Segment one image and write its mask set; returns the manifest path.

    Masks that come out empty after thresholding are dropped; if none
    survive the export fails rather than writing a useless manifest.
    """
    if backend is None:
        from .backends import ClassicalBackend
        backend = ClassicalBackend()

    image_path = os.fspath(image_path)
    img = read_ppm(image_path)
    h, w = img.shape[:2]
    prompt.check_bounds(w, h)

    grids = []
    for soft in backend.generate(img, prompt):
        grid = binarize(soft, prompt.threshold)
        if grid.any():
            grids.append(grid)
    if not grids:
        raise EmptyResultError(
            f"{image_path}: no non-empty mask for prompt {prompt.label()!r}")

    out_dir = os.fspath(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(image_path))[0]
    rel_paths = []
    for i, grid in enumerate(grids):
        rel = f"{stem}.mask{i:02d}.pgm"
        write_pgm(os.path.join(out_dir, rel), grid)
        rel_paths.append(rel)

    manifest = {
        "image": os.path.basename(image_path),
        "width": w,
        "height": h,
        "prompt": prompt.label(),
        "masks": rel_paths,
    }
    mpath = os.path.join(out_dir, stem + MANIFEST_SUFFIX)
    with open(mpath, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    return mpath
