class ExporterError(Exception):
    """Base for everything this package raises on purpose."""


class PromptError(ExporterError):
    """Prompt is malformed or out of the image bounds."""


class SetupError(ExporterError):
    """A backend dependency or weights file is missing."""


class EmptyResultError(ExporterError):
    """Segmentation produced no non-empty mask."""


class FormatError(ExporterError):
    """Input image could not be parsed."""
