"""Command-line mask exporter.

    mask-export --image pic.ppm --mode point --point 32,20 --out masks/
    mask-export --images-dir shots/ --mode everything --out masks/
"""

from __future__ import annotations

import argparse
import os
import sys

from .backends import make_backend
from .errors import ExporterError
from .export import export_masks
from .prompts import PromptSpec


def _parse_ints(text: str, n: int, what: str) -> tuple[int, ...]:
    parts = text.split(",")
    if len(parts) != n:
        raise ExporterError(f"{what} needs {n} comma-separated integers, "
                            f"got {text!r}")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise ExporterError(f"{what} needs integers, got {text!r}") from None


def build_prompt(args) -> PromptSpec:
    point = _parse_ints(args.point, 2, "--point") if args.point else None
    box = _parse_ints(args.box, 4, "--box") if args.box else None
    return PromptSpec(mode=args.mode, point=point, box=box,
                      threshold=args.threshold, max_masks=args.max_masks)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="mask-export",
        description="Export binary segmentation masks (PGM + JSON manifest) "
                    "for PPM images.")
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--image", help="one .ppm file")
    src.add_argument("--images-dir", help="directory of .ppm files")
    ap.add_argument("--mode", required=True,
                    choices=("point", "box", "everything"))
    ap.add_argument("--point", help="x,y seed for point mode")
    ap.add_argument("--box", help="x0,y0,x1,y1 for box mode")
    ap.add_argument("--threshold", type=float, default=0.5,
                    help="mask score binarization cut, in (0,1)")
    ap.add_argument("--max-masks", type=int, default=32,
                    help="everything-mode cap, largest area first")
    ap.add_argument("--backend", default="classical",
                    choices=("classical", "sam"))
    ap.add_argument("--sam-weights", default=None,
                    help="local weights file for the sam backend")
    ap.add_argument("--out", required=True, help="output directory")
    args = ap.parse_args(argv)

    try:
        prompt = build_prompt(args)
        backend = make_backend(args.backend, args.sam_weights)
        if args.image:
            paths = [args.image]
        else:
            paths = sorted(os.path.join(args.images_dir, n)
                           for n in os.listdir(args.images_dir)
                           if n.lower().endswith(".ppm"))
            if not paths:
                raise ExporterError(f"no .ppm files in {args.images_dir!r}")
        for p in paths:
            manifest = export_masks(p, prompt, args.out, backend=backend)
            print(manifest)
        return 0
    except (ExporterError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
