"""Prompt types shared by all backends."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import PromptError

MODES = ("point", "box", "everything")


@dataclass(frozen=True)
class PromptSpec:
    """What to segment.

    point: a single (x, y) seed on the object.
    box:   (x0, y0, x1, y1), half-open, around the object.
    everything: no coordinates; segment the whole frame.

    ``threshold`` binarizes the backend's soft mask scores, strictly
    inside (0, 1). ``max_masks`` caps everything-mode output,
    largest area first.
    """

    mode: str
    point: tuple[int, int] | None = None
    box: tuple[int, int, int, int] | None = None
    threshold: float = 0.5
    max_masks: int = 32

    def __post_init__(self):
        if self.mode not in MODES:
            raise PromptError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0.0 < self.threshold < 1.0:
            raise PromptError(
                f"threshold must be strictly inside (0, 1), "
                f"got {self.threshold}")
        if self.max_masks < 1:
            raise PromptError(f"max_masks must be >= 1, got {self.max_masks}")
        if self.mode == "point":
            if self.point is None:
                raise PromptError("point mode needs point=(x, y)")
        elif self.mode == "box":
            if self.box is None:
                raise PromptError("box mode needs box=(x0, y0, x1, y1)")
            x0, y0, x1, y1 = self.box
            if x0 >= x1 or y0 >= y1:
                raise PromptError(f"box {self.box} is empty or inverted")

    def label(self) -> str:
        """Short provenance string stored in the manifest."""
        if self.mode == "point":
            return f"point:{self.point[0]},{self.point[1]}"
        if self.mode == "box":
            return "box:" + ",".join(str(v) for v in self.box)
        return "everything"

    def check_bounds(self, width: int, height: int) -> None:
        if self.mode == "point":
            x, y = self.point
            if not (0 <= x < width and 0 <= y < height):
                raise PromptError(
                    f"point ({x}, {y}) outside {width}x{height} image")
        elif self.mode == "box":
            x0, y0, x1, y1 = self.box
            if not (0 <= x0 < x1 <= width and 0 <= y0 < y1 <= height):
                raise PromptError(
                    f"box {self.box} outside {width}x{height} image")
