"""Segmentation mask exporter.

Produces the PGM + JSON-manifest mask sets the transmission harness
consumes, from point, box, or everything prompts, using either a
weights-free classical backend or the optional promptable model.
"""

from .backends import ClassicalBackend, SamBackend, make_backend
from .errors import (EmptyResultError, ExporterError, FormatError,
                     PromptError, SetupError)
from .export import MANIFEST_SUFFIX, binarize, export_masks
from .netpbm import read_ppm, write_pgm
from .prompts import MODES, PromptSpec

__version__ = "0.1.0"

__all__ = [
    "ClassicalBackend", "EmptyResultError", "ExporterError", "FormatError",
    "MANIFEST_SUFFIX", "MODES", "PromptError", "PromptSpec", "SamBackend",
    "SetupError", "binarize", "export_masks", "make_backend", "read_ppm",
    "write_pgm",
]
