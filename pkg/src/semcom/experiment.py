"""Experiment orchestration: training, evaluation, sweeps, image export.

Every run is fully determined by (config, seed): per-image channel
streams derive as seed XOR image-index, and reports carry a provenance
block (seed, config digest, checkpoint hashes) but no timestamps, so a
repeated run reproduces its outputs byte for byte.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import ChannelSpec, make_rng, transmit, transmit_tensor
from .codec import (CodecConfig, CodecModel, build_codec, load_checkpoint,
                    power_normalize, save_checkpoint, toy_config)
from .dataset import load_dataset
from .errors import ConfigError, MaskError
from .masks import (MaskSet, apply_masks, load_mask_set, save_mask_set,
                    stub_generate)
from .metrics import psnr, psnr_masked
from .optim import Adam
from .tensor import Tape, Tensor, backward, mse_loss

PIPELINES = ("original", "masked")


@dataclass(frozen=True)
class StubSpec:
    """Parameters for mask generation without an external segmenter."""

    kind: str = "center_box"
    fraction: float = 0.25
    threshold: float = 0.5


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one training or evaluation run depends on."""

    dataset_dir: str
    codec: CodecConfig = field(default_factory=toy_config)
    pipeline: str = "original"
    mask_dir: str | None = None
    stub: StubSpec = field(default_factory=StubSpec)
    epochs: int = 200
    lr: float = 0.001
    batch_size: int = 2
    seed: int = 0
    channels: tuple[str, ...] = ("awgn", "rayleigh")
    snrs: tuple[float, ...] = tuple(float(s) for s in range(1, 21))
    train_channel: ChannelSpec | None = None

    def __post_init__(self):
        if self.pipeline not in PIPELINES:
            raise ConfigError(
                f"pipeline must be one of {PIPELINES}, got {self.pipeline!r}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.lr <= 0:
            raise ConfigError(f"lr must be positive, got {self.lr}")
        out_of_range = [s for s in self.snrs if not -10.0 <= s <= 40.0]
        if out_of_range:
            warnings.warn(f"snr values {out_of_range} outside the sane "
                          f"[-10, 40] dB range", stacklevel=2)

    def to_json_dict(self) -> dict:
        tc = self.train_channel
        return {
            "dataset_dir": self.dataset_dir,
            "codec": json.loads(self.codec.to_json()),
            "pipeline": self.pipeline,
            "mask_dir": self.mask_dir,
            "stub": {"kind": self.stub.kind, "fraction": self.stub.fraction,
                     "threshold": self.stub.threshold},
            "epochs": self.epochs,
            "lr": self.lr,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "channels": list(self.channels),
            "snrs": list(self.snrs),
            "train_channel": None if tc is None else {
                "kind": tc.kind, "snr_db": tc.snr_db,
                "equalize": tc.equalize, "seed": tc.seed},
        }


def config_digest(cfg: ExperimentConfig) -> str:
    """sha256 of the canonical config serialization."""
    text = json.dumps(cfg.to_json_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_file(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(os.fspath(path), "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# input preparation
# ---------------------------------------------------------------------------

def resolve_mask_sets(cfg: ExperimentConfig, paths: list[str],
                      images: list[np.ndarray]) -> list[MaskSet]:
    """One MaskSet per image: from manifest files when mask_dir is set,
    otherwise from the deterministic stub."""
    if cfg.mask_dir is not None:
        missing = []
        manifests = []
        for p in paths:
            stem = os.path.splitext(os.path.basename(p))[0]
            m = os.path.join(cfg.mask_dir, stem + ".masks.json")
            if not os.path.isfile(m):
                missing.append(os.path.basename(p))
            manifests.append(m)
        if missing:
            raise MaskError(
                f"no mask manifest in {cfg.mask_dir!r} for: {', '.join(missing)}")
        return [load_mask_set(m) for m in manifests]
    return [stub_generate(img, kind=cfg.stub.kind, fraction=cfg.stub.fraction,
                          threshold=cfg.stub.threshold,
                          image_name=os.path.basename(p))
            for p, img in zip(paths, images)]


def prepare_inputs(cfg: ExperimentConfig):
    """Load the dataset and derive pipeline inputs.

    Returns (paths, inputs, roi_grids): for the original pipeline the
    inputs are the images themselves and roi_grids is None; for the
    masked pipeline the inputs are composite ROI images and roi_grids
    holds the union mask of each.
    """
    size = cfg.codec.in_shape[1]
    if cfg.codec.in_shape[1] != cfg.codec.in_shape[2]:
        raise ConfigError("non-square codec input shapes are not supported "
                          "by the harness loader")
    paths, images = load_dataset(cfg.dataset_dir, size)
    if cfg.pipeline == "original":
        return paths, images, None
    mask_sets = resolve_mask_sets(cfg, paths, images)
    inputs = []
    grids = []
    for img, ms in zip(images, mask_sets):
        if ms.width != size or ms.height != size:
            raise MaskError(
                f"mask set for {ms.image!r} is {ms.width}x{ms.height} but the "
                f"codec input is {size}x{size}")
        roi = apply_masks(img, ms, mode="composite")[0]
        inputs.append(roi.data[0])
        grids.append(roi.mask)
    return paths, inputs, grids


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

@dataclass
class TrainResult:
    model: CodecModel
    epoch_losses: list[float]
    checkpoint_path: str | None
    loss_log_path: str | None


def train_codec(cfg: ExperimentConfig, checkpoint_path: str | None = None,
                loss_log_path: str | None = None,
                progress=None) -> TrainResult:
    """MSE training of the codec on the configured pipeline's inputs.

    The forward graph is encode -> power normalization -> optional
    train-time channel -> decode, the same composition evaluation uses.
    Default has no channel (noise-free training, noisy testing).
    """
    _, inputs, _ = prepare_inputs(cfg)
    model = build_codec(cfg.codec, seed=cfg.seed)
    opt = Adam(model.parameters(), lr=cfg.lr)
    perm_rng = make_rng(cfg.seed)
    chan_rng = (make_rng(cfg.train_channel.seed)
                if cfg.train_channel is not None else None)
    data = np.stack(inputs).astype(np.float32)
    n = data.shape[0]

    epoch_losses: list[float] = []
    for epoch in range(cfg.epochs):
        perm = perm_rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            batch = Tensor(data[idx])
            with Tape() as tape:
                z = power_normalize(model.encode(batch), per_item=True)
                if cfg.train_channel is not None:
                    z = transmit_tensor(z, cfg.train_channel, chan_rng)
                recon = model.decode(z)
                loss = mse_loss(recon, batch)
                backward(tape, loss)
            opt.step()
            total += loss.item() * len(idx)
        epoch_losses.append(total / n)
        if progress is not None:
            progress(epoch, epoch_losses[-1])

    if checkpoint_path is not None:
        save_checkpoint(model, checkpoint_path)
    if loss_log_path is not None:
        buf = io.StringIO()
        buf.write(f"# seed={cfg.seed}\n")
        buf.write(f"# config_digest={config_digest(cfg)}\n")
        buf.write("epoch,loss\n")
        for i, v in enumerate(epoch_losses, start=1):
            buf.write(f"{i},{v:.9g}\n")
        _atomic_write_text(loss_log_path, buf.getvalue())
    return TrainResult(model, epoch_losses, checkpoint_path, loss_log_path)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvalStats:
    psnr_mean: float
    psnr_std: float
    n: int
    roi_psnr_mean: float | None = None
    roi_psnr_std: float | None = None


def _reconstruct(model: CodecModel, img: np.ndarray, spec: ChannelSpec,
                 rng) -> np.ndarray:
    x = Tensor(img[None].astype(np.float32))
    z = power_normalize(model.encode(x), per_item=True)
    y = transmit(z.data, spec, rng)
    return model.decode(Tensor(y)).data[0]


def evaluate_model(model: CodecModel, inputs: list[np.ndarray],
                   spec: ChannelSpec, seed: int,
                   roi_grids: list[np.ndarray] | None = None) -> EvalStats:
    """Mean/std PSNR of the transmit-reconstruct loop over a set of inputs.

    Each image gets its own channel stream seeded seed XOR index, so two
    evaluations at different SNRs see the same underlying noise draw
    (paired comparison). The PSNR reference is the pipeline input itself;
    for masked inputs an ROI-restricted PSNR is reported alongside.
    """
    vals = []
    roi_vals = []
    for i, img in enumerate(inputs):
        recon = _reconstruct(model, img, spec, make_rng(seed ^ i))
        vals.append(psnr(img, recon).value_db)
        if roi_grids is not None:
            roi_vals.append(psnr_masked(img, recon, roi_grids[i]).value_db)
    arr = np.asarray(vals, dtype=np.float64)
    stats = EvalStats(float(arr.mean()), float(arr.std()), len(vals))
    if roi_grids is not None:
        r = np.asarray(roi_vals, dtype=np.float64)
        stats = replace(stats, roi_psnr_mean=float(r.mean()),
                        roi_psnr_std=float(r.std()))
    return stats


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    pipeline: str
    channel: str
    snr_db: float
    psnr_mean: float
    psnr_std: float
    n: int


@dataclass(frozen=True)
class SweepReport:
    rows: tuple[SweepRow, ...]
    seed: int
    config_digest: str
    checkpoint_hashes: dict[str, str]


def format_report(report: SweepReport) -> str:
    buf = io.StringIO()
    buf.write(f"# seed={report.seed}\n")
    buf.write(f"# config_digest={report.config_digest}\n")
    for name in sorted(report.checkpoint_hashes):
        buf.write(f"# checkpoint_{name}={report.checkpoint_hashes[name]}\n")
    buf.write("pipeline,channel,snr_db,psnr_mean,psnr_std,n\n")
    for r in report.rows:
        buf.write(f"{r.pipeline},{r.channel},{r.snr_db:g},"
                  f"{r.psnr_mean:.6f},{r.psnr_std:.6f},{r.n}\n")
    return buf.getvalue()


def _atomic_write_text(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    os.replace(tmp, path)


def run_sweep(cfg: ExperimentConfig, checkpoint_paths: dict[str, str],
              out_csv: str | None = None) -> SweepReport:
    """PSNR grid over every (pipeline, channel, snr) cell.

    ``checkpoint_paths`` maps pipeline name to its trained checkpoint.
    All rows are computed before anything is written, so a failure
    leaves no partial report behind.
    """
    if not checkpoint_paths:
        raise ConfigError("sweep needs at least one pipeline checkpoint")
    for name in checkpoint_paths:
        if name not in PIPELINES:
            raise ConfigError(f"unknown pipeline {name!r} in checkpoints")
    rows: list[SweepRow] = []
    hashes = {}
    for pipeline in sorted(checkpoint_paths):
        model = load_checkpoint(checkpoint_paths[pipeline])
        if model.config != cfg.codec:
            raise ConfigError(
                f"checkpoint for {pipeline!r} was trained with a different "
                f"codec config than the sweep requests")
        hashes[pipeline] = sha256_file(checkpoint_paths[pipeline])
        pcfg = replace(cfg, pipeline=pipeline)
        _, inputs, grids = prepare_inputs(pcfg)
        for channel in sorted(cfg.channels):
            for snr in sorted(cfg.snrs):
                spec = ChannelSpec(kind=channel, snr_db=float(snr),
                                   seed=cfg.seed)
                st = evaluate_model(model, inputs, spec, cfg.seed,
                                    roi_grids=grids)
                rows.append(SweepRow(pipeline, channel, float(snr),
                                     st.psnr_mean, st.psnr_std, st.n))
    report = SweepReport(tuple(rows), cfg.seed, config_digest(cfg), hashes)
    if out_csv is not None:
        _atomic_write_text(out_csv, format_report(report))
    return report


# ---------------------------------------------------------------------------
# image export
# ---------------------------------------------------------------------------

def export_images(cfg: ExperimentConfig, image_path: str,
                  checkpoint_paths: dict[str, str],
                  channel_specs: list[ChannelSpec],
                  out_dir: str) -> list[str]:
    """Write source, ROI, and per-channel reconstructions as PPM files."""
    from .dataset import load_image
    from .netpbm import write_ppm

    os.makedirs(out_dir, exist_ok=True)
    size = cfg.codec.in_shape[1]
    img = load_image(image_path, size)
    stem = os.path.splitext(os.path.basename(image_path))[0]

    mask_sets = resolve_mask_sets(cfg, [image_path], [img])
    roi = apply_masks(img, mask_sets[0], mode="composite")[0]

    written = []

    def emit(name: str, data: np.ndarray) -> None:
        path = os.path.join(out_dir, name)
        write_ppm(path, data)
        written.append(path)

    emit(f"{stem}_original.ppm", img)
    emit(f"{stem}_roi.ppm", roi.data[0])

    variants = {"original": img, "masked": roi.data[0]}
    for pipeline in sorted(checkpoint_paths):
        model = load_checkpoint(checkpoint_paths[pipeline])
        src = variants[pipeline]
        for j, spec in enumerate(channel_specs):
            recon = _reconstruct(model, src, spec, make_rng(cfg.seed ^ j))
            tag = spec.kind if spec.kind == "identity" \
                else f"{spec.kind}_{spec.snr_db:g}dB"
            emit(f"{stem}_recon_{pipeline}_{tag}.ppm", recon)
    return written


def generate_stub_masks(cfg: ExperimentConfig, out_dir: str) -> list[str]:
    """Write stub mask manifests for every dataset image."""
    size = cfg.codec.in_shape[1]
    paths, images = load_dataset(cfg.dataset_dir, size)
    manifests = []
    for p, img in zip(paths, images):
        ms = stub_generate(img, kind=cfg.stub.kind, fraction=cfg.stub.fraction,
                           threshold=cfg.stub.threshold,
                           image_name=os.path.basename(p))
        stem = os.path.splitext(os.path.basename(p))[0]
        manifests.append(save_mask_set(ms, out_dir, stem=stem))
    return manifests
