"""Benchmark the JIT kernels against the pure-numpy fallback.

Runs itself twice as a subprocess, once per SEMCOM_JIT setting, so each
backend is measured in a clean interpreter (the backend is fixed at
import time). Usage:

    python3 benchmarks/bench_kernels.py

Numbers are wall-clock milliseconds, best of several repeats on one core.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

SCENARIOS = (
    "conv_fwd_512",
    "conv_fwd_mid",
    "conv_input_grad",
    "conv_weight_grad",
    "train_step_64",
)


def _best_ms(fn, repeats: int = 5, warmup: int = 2) -> float:
    for _ in range(warmup):
        fn()
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best * 1000.0


def run_child() -> None:
    import numpy as np

    from semcom import BACKEND, Adam, Tape, Tensor, backward, build_codec, \
        make_rng, mse_loss, toy_config
    from semcom.codec import power_normalize
    from semcom.kernels import conv2d_forward, conv2d_input_grad, \
        conv2d_weight_grad

    rng = make_rng(0)
    print(f"backend={BACKEND}", file=sys.stderr)

    x_big = rng.standard_normal((1, 3, 512, 512)).astype(np.float32)
    w_big = rng.standard_normal((32, 3, 4, 4)).astype(np.float32)
    b_big = np.zeros(32, dtype=np.float32)

    x_mid = rng.standard_normal((8, 32, 32, 32)).astype(np.float32)
    w_mid = rng.standard_normal((64, 32, 4, 4)).astype(np.float32)
    b_mid = np.zeros(64, dtype=np.float32)
    dy_mid = rng.standard_normal((8, 64, 16, 16)).astype(np.float32)

    model = build_codec(toy_config(64), seed=1)
    opt = Adam(model.parameters(), lr=0.001)
    batch = Tensor(rng.random((2, 3, 64, 64)).astype(np.float32))

    def train_step():
        with Tape() as tape:
            z = power_normalize(model.encode(batch), per_item=True)
            loss = mse_loss(model.decode(z), batch.data)
            backward(tape, loss)
        opt.step()

    timings = {
        "conv_fwd_512": _best_ms(
            lambda: conv2d_forward(x_big, w_big, b_big, 2, 1)),
        "conv_fwd_mid": _best_ms(
            lambda: conv2d_forward(x_mid, w_mid, b_mid, 2, 1)),
        "conv_input_grad": _best_ms(
            lambda: conv2d_input_grad(dy_mid, w_mid, 2, 1, 32, 32)),
        "conv_weight_grad": _best_ms(
            lambda: conv2d_weight_grad(dy_mid, x_mid, 2, 1, 4)),
        "train_step_64": _best_ms(train_step, repeats=5, warmup=3),
    }
    for name in SCENARIOS:
        print(f"{name},{timings[name]:.3f}")


def run_parent() -> int:
    here = os.path.abspath(__file__)
    results: dict[str, dict[str, float]] = {}
    for label, flag in (("numba", "1"), ("numpy", "0")):
        env = dict(os.environ, SEMCOM_JIT=flag)
        proc = subprocess.run([sys.executable, here, "--child"],
                              capture_output=True, text=True, env=env)
        if proc.returncode != 0:
            print(f"{label} run failed:\n{proc.stderr}", file=sys.stderr)
            return 1
        results[label] = {}
        for line in proc.stdout.strip().splitlines():
            name, ms = line.split(",")
            results[label][name] = float(ms)

    width = max(len(s) for s in SCENARIOS)
    print(f"{'scenario':<{width}}  {'numba ms':>10}  {'numpy ms':>10}  "
          f"{'numba/numpy':>11}")
    for name in SCENARIOS:
        a = results["numba"][name]
        b = results["numpy"][name]
        print(f"{name:<{width}}  {a:>10.2f}  {b:>10.2f}  {a / b:>11.2f}x")
    print("\nratios above 1 mean the numpy (BLAS tensordot) path is faster; "
          "set SEMCOM_JIT=0 to select it.")
    return 0


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.child:
        run_child()
        return 0
    return run_parent()


if __name__ == "__main__":
    sys.exit(main())
