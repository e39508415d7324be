"""Learned image codec over simulated noisy channels.

The pipeline: prepare an input (full image or mask-restricted region),
encode it to a compact feature tensor, normalize transmit power, pass it
through an AWGN or Rayleigh channel at a chosen SNR, decode, and score
the reconstruction with PSNR. Training and evaluation are fully seeded.
"""

from .channel import ChannelSpec, awgn, make_rng, measure_snr, rayleigh, \
    rayleigh_gains, transmit, transmit_tensor
from .codec import CodecConfig, CodecModel, build_codec, default_config, \
    load_checkpoint, power_normalize, save_checkpoint, toy_config
from .dataset import load_dataset, load_image
from .errors import CheckpointError, ConfigError, DatasetError, \
    DegenerateSignalError, GraphError, MaskError, NetpbmError, ShapeError
from .experiment import ExperimentConfig, StubSpec, SweepReport, SweepRow, \
    config_digest, evaluate_model, export_images, run_sweep, train_codec
from .kernels import BACKEND, JIT_ENABLED
from .masks import Mask, MaskSet, RoiImage, apply_masks, load_mask_set, \
    manifest_path_for, save_mask_set, stub_generate, union
from .metrics import PsnrResult, compression_ratio, psnr, psnr_masked
from .netpbm import read_pgm, read_ppm, write_pgm, write_ppm
from .optim import Adam
from .tensor import Parameter, Tape, Tensor, activation, backward, conv2d, \
    conv_transpose2d, mse_loss, mul

__version__ = "0.1.0"

__all__ = [
    "Adam", "BACKEND", "ChannelSpec", "CheckpointError", "CodecConfig",
    "CodecModel", "ConfigError", "DatasetError", "DegenerateSignalError",
    "ExperimentConfig", "GraphError", "JIT_ENABLED", "Mask", "MaskError",
    "MaskSet", "NetpbmError", "Parameter", "PsnrResult", "RoiImage",
    "ShapeError", "StubSpec", "SweepReport", "SweepRow", "Tape", "Tensor",
    "activation", "apply_masks", "awgn", "backward", "build_codec",
    "compression_ratio", "config_digest", "conv2d", "conv_transpose2d",
    "default_config", "evaluate_model", "export_images", "load_checkpoint",
    "load_dataset", "load_image", "load_mask_set", "make_rng",
    "manifest_path_for", "measure_snr",
    "mse_loss", "mul", "power_normalize", "psnr", "psnr_masked", "rayleigh",
    "rayleigh_gains", "read_pgm", "read_ppm", "run_sweep", "save_checkpoint",
    "save_mask_set", "stub_generate", "toy_config", "train_codec", "transmit",
    "transmit_tensor", "union", "write_pgm", "write_ppm",
]
