"""Segmentation backends.

Each backend turns (image, prompt) into a list of soft masks: float
arrays of the image's height and width with scores in [0, 1]. The
exporter binarizes them at the prompt threshold. Two implementations:

ClassicalBackend needs no model weights and is fully deterministic,
built on flood fill, Otsu thresholding, and graph-based segmentation.
SamBackend wraps the promptable segmentation model; it needs the
optional dependency plus a local weights file.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import SetupError
from .prompts import PromptSpec


class ClassicalBackend:
    """Deterministic segmentation without pretrained weights.

    point: flood fill from the seed over similar intensities.
    box:   Otsu split of the grayscale values inside the box; the
           above-threshold side is the object.
    everything: felzenszwalb graph segmentation, one mask per segment.
    """

    def __init__(self, flood_tolerance: int = 24, felz_scale: float = 100.0,
                 felz_min_size: int = 16):
        self.flood_tolerance = flood_tolerance
        self.felz_scale = felz_scale
        self.felz_min_size = felz_min_size

    def generate(self, image: np.ndarray, prompt: PromptSpec) -> list[np.ndarray]:
        import cv2

        gray = cv2.cvtColor(image, cv2.COLOR_RGB2GRAY)
        h, w = gray.shape

        if prompt.mode == "point":
            fill = np.zeros((h + 2, w + 2), dtype=np.uint8)
            flags = 4 | cv2.FLOODFILL_MASK_ONLY | (255 << 8)
            cv2.floodFill(gray, fill, prompt.point, 0,
                          loDiff=self.flood_tolerance,
                          upDiff=self.flood_tolerance, flags=flags)
            return [(fill[1:-1, 1:-1] > 0).astype(np.float32)]

        if prompt.mode == "box":
            x0, y0, x1, y1 = prompt.box
            crop = gray[y0:y1, x0:x1]
            thresh, _ = cv2.threshold(crop, 0, 255,
                                      cv2.THRESH_BINARY + cv2.THRESH_OTSU)
            out = np.zeros((h, w), dtype=np.float32)
            out[y0:y1, x0:x1] = (crop > thresh).astype(np.float32)
            return [out]

        from skimage.segmentation import felzenszwalb

        labels = felzenszwalb(image, scale=self.felz_scale, sigma=0.6,
                              min_size=self.felz_min_size)
        masks = [(labels == lab).astype(np.float32)
                 for lab in np.unique(labels)]
        masks.sort(key=lambda m: -float(m.sum()))
        return masks[:prompt.max_masks]


class SamBackend:
    """Promptable segmentation via the optional segment-anything package.

    Requires local model weights; nothing is downloaded here.
    """

    def __init__(self, weights_path: str, model_type: str = "vit_b"):
        try:
            import segment_anything  # noqa: F401
        except ImportError:
            raise SetupError(
                "the segment-anything package is not installed; "
                "install it with 'pip install segment-anything' and download "
                "a weights file, or use the classical backend "
                "(--backend classical)") from None
        if not os.path.isfile(weights_path):
            raise SetupError(
                f"segmentation weights not found at {weights_path!r}; "
                f"download the checkpoint for model type {model_type!r} "
                f"and pass its path, or use --backend classical")
        from segment_anything import sam_model_registry

        self.model = sam_model_registry[model_type](checkpoint=weights_path)
        self.model.eval()

    def generate(self, image: np.ndarray, prompt: PromptSpec) -> list[np.ndarray]:
        if prompt.mode == "everything":
            from segment_anything import SamAutomaticMaskGenerator

            records = SamAutomaticMaskGenerator(self.model).generate(image)
            records.sort(key=lambda r: -r["area"])
            return [r["segmentation"].astype(np.float32)
                    for r in records[:prompt.max_masks]]

        from segment_anything import SamPredictor

        predictor = SamPredictor(self.model)
        predictor.set_image(image)
        if prompt.mode == "point":
            masks, _, _ = predictor.predict(
                point_coords=np.array([prompt.point], dtype=np.float64),
                point_labels=np.array([1]), multimask_output=False)
        else:
            masks, _, _ = predictor.predict(
                box=np.array(prompt.box, dtype=np.float64),
                multimask_output=False)
        return [m.astype(np.float32) for m in masks]


def make_backend(name: str, weights_path: str | None = None):
    if name == "classical":
        return ClassicalBackend()
    if name == "sam":
        if weights_path is None:
            raise SetupError("the sam backend needs --sam-weights PATH")
        return SamBackend(weights_path)
    raise SetupError(f"unknown backend {name!r}; use 'classical' or 'sam'")
