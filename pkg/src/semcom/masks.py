"""Binary region masks: manifest I/O, composition, and stub generation.

A mask set is the unit of exchange with external segmentation tools: a
JSON manifest naming the source image and one binary PGM per mask. Mask
grids inside the package are [H,W] uint8 with values in {0, 1}; PGM
pixels above 127 map to 1 on load, so soft masks must be thresholded by
whoever exports them.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import MaskError, ShapeError
from .netpbm import read_pgm, write_pgm

MANIFEST_SUFFIX = ".masks.json"


def _check_mask_array(data: np.ndarray) -> np.ndarray:
    if data.ndim != 2:
        raise MaskError(f"mask must be 2-D [H,W], got shape {data.shape}")
    if data.dtype != np.uint8:
        raise MaskError(f"mask must be uint8, got {data.dtype}")
    if (data > 1).any():
        raise MaskError("mask values must be 0 or 1")
    return data


@dataclass(frozen=True)
class Mask:
    """One binary region, [H,W] uint8 in {0,1}."""

    data: np.ndarray
    name: str = ""

    def __post_init__(self):
        _check_mask_array(self.data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def area(self) -> int:
        return int(np.count_nonzero(self.data))


@dataclass(frozen=True)
class MaskSet:
    """All masks produced for one image, plus provenance fields."""

    image: str
    width: int
    height: int
    masks: tuple[Mask, ...]
    prompt: str = ""

    def __post_init__(self):
        if not self.masks:
            raise MaskError(f"mask set for {self.image!r} is empty")
        for m in self.masks:
            if m.data.shape != (self.height, self.width):
                raise MaskError(
                    f"mask {m.name!r} is {m.width}x{m.height} but the set "
                    f"declares {self.width}x{self.height}")


@dataclass(frozen=True)
class RoiImage:
    """A masked single-image batch plus the mask that selected it.

    ``data`` is [1,C,H,W]; pixels outside ``mask`` are exactly zero.
    ``coverage`` is the selected fraction of the image plane.
    """

    data: np.ndarray
    mask: np.ndarray
    coverage: float


def union(masks) -> Mask:
    """Elementwise OR of all masks in a MaskSet or iterable."""
    mask_list = list(masks.masks) if isinstance(masks, MaskSet) else list(masks)
    arrs = [m.data if isinstance(m, Mask) else np.asarray(m) for m in mask_list]
    if not arrs:
        raise MaskError("union of zero masks is undefined")
    out = np.zeros_like(arrs[0])
    for a in arrs:
        _check_mask_array(a)
        if a.shape != out.shape:
            raise MaskError(f"mask shapes differ: {a.shape} vs {out.shape}")
        out |= a
    return Mask(out, name="union")


def _as_chw(image: np.ndarray) -> np.ndarray:
    if image.ndim == 4:
        if image.shape[0] != 1:
            raise ShapeError(
                f"apply_masks takes one image, got batch of {image.shape[0]}")
        return image[0]
    if image.ndim == 3:
        return image
    raise ShapeError(f"expected [C,H,W] or [1,C,H,W] image, got {image.shape}")


def _roi(img: np.ndarray, grid: np.ndarray) -> RoiImage:
    if grid.shape != img.shape[1:]:
        raise MaskError(
            f"mask plane {grid.shape} does not match image {img.shape[1:]}")
    cov = float(np.count_nonzero(grid)) / (grid.shape[0] * grid.shape[1])
    return RoiImage((img * grid.astype(img.dtype))[None], grid, cov)


def apply_masks(image: np.ndarray, masks, mode: str = "composite") -> list[RoiImage]:
    """Zero out everything outside the masked regions.

    composite: a single RoiImage keeping the union of all masks.
    per_mask:  one RoiImage per mask, in set order.
    """
    img = _as_chw(image)
    mask_list = list(masks.masks) if isinstance(masks, MaskSet) else list(masks)
    if mode == "composite":
        return [_roi(img, union(mask_list).data)]
    if mode == "per_mask":
        out = []
        for m in mask_list:
            a = m.data if isinstance(m, Mask) else _check_mask_array(np.asarray(m))
            out.append(_roi(img, a))
        return out
    raise MaskError(f"unknown apply mode {mode!r}; use 'composite' or 'per_mask'")


# ---------------------------------------------------------------------------
# manifest I/O
# ---------------------------------------------------------------------------

def manifest_path_for(image_path: str | os.PathLike) -> str:
    """Conventional manifest location for an image: <stem>.masks.json."""
    p = os.fspath(image_path)
    stem, _ = os.path.splitext(p)
    return stem + MANIFEST_SUFFIX


def save_mask_set(mask_set: MaskSet, out_dir: str | os.PathLike,
                  stem: str | None = None) -> str:
    """Write one PGM per mask plus the JSON manifest; returns manifest path."""
    out_dir = os.fspath(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    if stem is None:
        stem = os.path.splitext(os.path.basename(mask_set.image))[0]
    rel_paths = []
    for i, m in enumerate(mask_set.masks):
        rel = f"{stem}.mask{i:02d}.pgm"
        write_pgm(os.path.join(out_dir, rel), m.data * np.uint8(255))
        rel_paths.append(rel)
    manifest = {
        "image": mask_set.image,
        "width": mask_set.width,
        "height": mask_set.height,
        "prompt": mask_set.prompt,
        "masks": rel_paths,
    }
    mpath = os.path.join(out_dir, stem + MANIFEST_SUFFIX)
    with open(mpath, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    return mpath


def load_mask_set(manifest_path: str | os.PathLike) -> MaskSet:
    """Read a manifest and its PGM masks; pixel > 127 counts as selected."""
    manifest_path = os.fspath(manifest_path)
    with open(manifest_path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise MaskError(f"{manifest_path}: invalid JSON ({e})") from None
    for key in ("image", "width", "height", "masks"):
        if key not in doc:
            raise MaskError(f"{manifest_path}: manifest missing {key!r}")
    if not isinstance(doc["masks"], list) or not doc["masks"]:
        raise MaskError(f"{manifest_path}: manifest lists no masks")
    base = os.path.dirname(manifest_path)
    masks = []
    for rel in doc["masks"]:
        try:
            gray = read_pgm(os.path.join(base, rel))
        except OSError as e:
            raise MaskError(
                f"{manifest_path}: cannot read mask {rel!r} ({e})") from None
        masks.append(Mask((gray > 127).astype(np.uint8), name=rel))
    return MaskSet(image=str(doc["image"]), width=int(doc["width"]),
                   height=int(doc["height"]), masks=tuple(masks),
                   prompt=str(doc.get("prompt", "")))


# ---------------------------------------------------------------------------
# stub generation (no segmentation model required)
# ---------------------------------------------------------------------------

def stub_generate(image: np.ndarray, kind: str = "center_box",
                  fraction: float = 0.25, threshold: float = 0.5,
                  image_name: str = "") -> MaskSet:
    """Deterministic single-mask stand-in for a real segmenter.

    center_box: centered rectangle covering ~``fraction`` of the area,
    side lengths round(dim * sqrt(fraction)).
    luminance_threshold: pixels whose channel mean exceeds ``threshold``.
    """
    img = _as_chw(image)
    _, h, w = img.shape
    if kind == "center_box":
        if not 0.0 < fraction <= 1.0:
            raise MaskError(f"fraction must be in (0, 1], got {fraction}")
        side = math.sqrt(fraction)
        bh = min(h, max(1, round(h * side)))
        bw = min(w, max(1, round(w * side)))
        top = (h - bh) // 2
        left = (w - bw) // 2
        data = np.zeros((h, w), dtype=np.uint8)
        data[top:top + bh, left:left + bw] = 1
        name = f"center_box_{fraction:g}"
    elif kind == "luminance_threshold":
        if not 0.0 <= threshold <= 1.0:
            raise MaskError(f"threshold must be in [0, 1], got {threshold}")
        lum = img.astype(np.float64).mean(axis=0)
        data = (lum > threshold).astype(np.uint8)
        name = f"luminance_{threshold:g}"
    else:
        raise MaskError(f"unknown stub kind {kind!r}")
    return MaskSet(image=image_name, width=w, height=h,
                   masks=(Mask(data, name=name),),
                   prompt=f"stub:{kind}")
