"""Command-line interface.

Subcommands: train, eval, sweep, export-images, gen-masks. Flags mirror
the experiment config; --config loads the same fields from a JSON file,
with explicit flags taking precedence.
"""

from __future__ import annotations

import argparse
import json
import sys

from .channel import KINDS, ChannelSpec
from .codec import CodecConfig, toy_config
from .errors import ConfigError
from .experiment import (ExperimentConfig, StubSpec, evaluate_model,
                         export_images, generate_stub_masks, prepare_inputs,
                         run_sweep, train_codec)


def _parse_snrs(text: str) -> tuple[float, ...]:
    text = text.strip()
    if ":" in text:
        lo, hi = text.split(":", 1)
        lo_i, hi_i = int(lo), int(hi)
        if hi_i < lo_i:
            raise ConfigError(f"bad SNR range {text!r}")
        return tuple(float(s) for s in range(lo_i, hi_i + 1))
    return tuple(float(s) for s in text.split(","))


def _parse_channel_specs(text: str, seed: int) -> list[ChannelSpec]:
    specs = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            kind, snr = part.split(":", 1)
            specs.append(ChannelSpec(kind=kind, snr_db=float(snr), seed=seed))
        else:
            specs.append(ChannelSpec(kind=part, seed=seed))
    return specs


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with experiment fields; "
                   "explicit flags override it")
    p.add_argument("--data", help="directory of .ppm images")
    p.add_argument("--size", type=int, help="square image size, divisible "
                   "by 16 (default 64)")
    p.add_argument("--full-scale", action="store_true",
                   help="use the full 512x512 profile (hours of compute)")
    p.add_argument("--pipeline", choices=("original", "masked"))
    p.add_argument("--masks", help="directory of <stem>.masks.json manifests "
                   "(default: built-in stub masks)")
    p.add_argument("--stub-kind", choices=("center_box", "luminance_threshold"))
    p.add_argument("--stub-fraction", type=float)
    p.add_argument("--stub-threshold", type=float)
    p.add_argument("--seed", type=int, default=None)


def _build_config(args, require_seed: bool = False) -> ExperimentConfig:
    doc = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as f:
            doc = json.load(f)

    def pick(flag, key, default):
        if flag is not None:
            return flag
        return doc.get(key, default)

    dataset_dir = pick(args.data, "dataset_dir", None)
    if dataset_dir is None:
        raise ConfigError("--data (or dataset_dir in --config) is required")

    seed = pick(args.seed, "seed", None)
    if seed is None:
        if require_seed:
            raise ConfigError("--seed is required for sweep (reports must "
                              "be reproducible)")
        seed = 0

    if "codec" in doc and args.size is None and not args.full_scale:
        codec = CodecConfig.from_json(json.dumps(doc["codec"]))
    elif args.full_scale:
        codec = CodecConfig()
    else:
        codec = toy_config(pick(args.size, "size", 64))

    stub_doc = doc.get("stub", {})
    stub = StubSpec(
        kind=pick(args.stub_kind, "", stub_doc.get("kind", "center_box")),
        fraction=args.stub_fraction if args.stub_fraction is not None
        else stub_doc.get("fraction", 0.25),
        threshold=args.stub_threshold if args.stub_threshold is not None
        else stub_doc.get("threshold", 0.5),
    )

    tc_doc = doc.get("train_channel")
    train_channel = None
    if getattr(args, "train_channel", None):
        train_channel = ChannelSpec(kind=args.train_channel,
                                    snr_db=getattr(args, "train_snr", 10.0),
                                    seed=seed)
    elif tc_doc:
        train_channel = ChannelSpec(kind=tc_doc["kind"],
                                    snr_db=float(tc_doc.get("snr_db", 10.0)),
                                    equalize=bool(tc_doc.get("equalize", True)),
                                    seed=int(tc_doc.get("seed", seed)))

    snrs = doc.get("snrs")
    if getattr(args, "snrs", None):
        snrs = _parse_snrs(args.snrs)
    elif snrs is not None:
        snrs = tuple(float(s) for s in snrs)
    else:
        snrs = tuple(float(s) for s in range(1, 21))

    channels = doc.get("channels")
    if getattr(args, "channels", None):
        channels = tuple(args.channels.split(","))
    elif channels is not None:
        channels = tuple(channels)
    else:
        channels = ("awgn", "rayleigh")

    return ExperimentConfig(
        dataset_dir=dataset_dir,
        codec=codec,
        pipeline=pick(args.pipeline, "pipeline", "original"),
        mask_dir=pick(args.masks, "mask_dir", None),
        stub=stub,
        epochs=pick(getattr(args, "epochs", None), "epochs", 200),
        lr=pick(getattr(args, "lr", None), "lr", 0.001),
        batch_size=pick(getattr(args, "batch", None), "batch_size", 2),
        seed=seed,
        channels=channels,
        snrs=snrs,
        train_channel=train_channel,
    )


def _cmd_train(args) -> int:
    cfg = _build_config(args)
    every = max(1, cfg.epochs // 10)

    def progress(epoch, loss):
        if (epoch + 1) % every == 0 or epoch == 0:
            print(f"epoch {epoch + 1}/{cfg.epochs}  loss {loss:.6g}")

    res = train_codec(cfg, checkpoint_path=args.out,
                      loss_log_path=args.loss_log, progress=progress)
    if res.epoch_losses:
        print(f"final epoch loss {res.epoch_losses[-1]:.6g}")
    print(f"checkpoint written to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    cfg = _build_config(args)
    from .codec import load_checkpoint
    model = load_checkpoint(args.checkpoint)
    if model.config != cfg.codec:
        raise ConfigError("checkpoint codec config does not match the "
                          "requested evaluation config")
    _, inputs, grids = prepare_inputs(cfg)
    spec = ChannelSpec(kind=args.channel, snr_db=args.snr,
                       equalize=not args.no_equalize, seed=cfg.seed)
    st = evaluate_model(model, inputs, spec, cfg.seed, roi_grids=grids)
    print(f"pipeline={cfg.pipeline} channel={spec.kind} snr_db={spec.snr_db:g}")
    print(f"psnr_mean={st.psnr_mean:.6f} psnr_std={st.psnr_std:.6f} n={st.n}")
    if st.roi_psnr_mean is not None:
        print(f"roi_psnr_mean={st.roi_psnr_mean:.6f} "
              f"roi_psnr_std={st.roi_psnr_std:.6f}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _build_config(args, require_seed=True)
    checkpoints = {"original": args.checkpoint}
    if args.masked_checkpoint:
        checkpoints["masked"] = args.masked_checkpoint
    report = run_sweep(cfg, checkpoints, out_csv=args.out)
    print(f"{len(report.rows)} rows written to {args.out}")
    return 0


def _cmd_export_images(args) -> int:
    cfg = _build_config(args)
    checkpoints = {"original": args.checkpoint}
    if args.masked_checkpoint:
        checkpoints["masked"] = args.masked_checkpoint
    specs = _parse_channel_specs(args.channels, cfg.seed)
    written = export_images(cfg, args.image, checkpoints, specs, args.out)
    for path in written:
        print(path)
    return 0


def _cmd_gen_masks(args) -> int:
    cfg = _build_config(args)
    manifests = generate_stub_masks(cfg, args.out)
    print(f"{len(manifests)} manifests written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="semcom",
        description="Train and evaluate a learned image codec over noisy "
                    "channels, with optional mask-restricted transmission.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a codec checkpoint")
    _add_common(p)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--train-channel", choices=KINDS, default=None,
                   help="optional channel inside the training loop "
                   "(default: none, train clean)")
    p.add_argument("--train-snr", type=float, default=10.0)
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--loss-log", default=None, help="per-epoch loss CSV")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint at one "
                       "channel/SNR point")
    _add_common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--channel", choices=KINDS, default="awgn")
    p.add_argument("--snr", type=float, default=10.0)
    p.add_argument("--no-equalize", action="store_true",
                   help="disable Rayleigh gain equalization")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("sweep", help="PSNR grid over channels and SNRs")
    _add_common(p)
    p.add_argument("--checkpoint", required=True,
                   help="original-pipeline checkpoint")
    p.add_argument("--masked-checkpoint", default=None,
                   help="masked-pipeline checkpoint")
    p.add_argument("--channels", default=None,
                   help="comma list, default awgn,rayleigh")
    p.add_argument("--snrs", default=None,
                   help="comma list or lo:hi range, default 1:20")
    p.add_argument("--out", required=True, help="report CSV path")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("export-images", help="write source/ROI/"
                       "reconstruction PPMs for one image")
    _add_common(p)
    p.add_argument("--image", required=True, help="source .ppm file")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--masked-checkpoint", default=None)
    p.add_argument("--channels", default="awgn:10,rayleigh:10",
                   help="comma list of kind[:snr] specs")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_export_images)

    p = sub.add_parser("gen-masks", help="write stub mask manifests for "
                       "a dataset")
    _add_common(p)
    p.add_argument("--out", required=True, help="manifest output directory")
    p.set_defaults(func=_cmd_gen_masks)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # our domain errors carry readable messages
        from . import errors
        if type(e).__module__ == errors.__name__:
            print(f"error: {e}", file=sys.stderr)
            return 2
        raise


if __name__ == "__main__":
    sys.exit(main())
