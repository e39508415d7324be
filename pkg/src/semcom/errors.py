"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Tensor shapes incompatible with the requested operation."""


class ConfigError(ValueError):
    """Inconsistent layer/model/experiment configuration."""


class GraphError(RuntimeError):
    """Backward pass requested on a value the tape did not produce."""


class DegenerateSignalError(ValueError):
    """Zero-power signal where a power measurement is required."""


class CheckpointError(ValueError):
    """Malformed or truncated checkpoint file."""


class MaskError(ValueError):
    """Mask ingestion or mask/image consistency failure."""


class DatasetError(ValueError):
    """Unusable dataset directory."""


class NetpbmError(ValueError):
    """Malformed PPM/PGM file."""
