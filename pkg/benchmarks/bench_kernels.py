"""Timing comparison of the compiled and pure-NumPy kernel backends.

Runs each hot kernel on edge-list workloads shaped like real molecule
batches, then times a full encoder forward+backward. Backends are forced
per-process via RETROKIT_KERNELS, so this script re-executes itself once
per backend and prints a combined table.

Usage: python3 benchmarks/bench_kernels.py [--rows N] [--width W] [--repeat R]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _time(fn, repeat: int) -> float:
    fn()  # warm up
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_backend(rows: int, width: int, repeat: int) -> dict[str, float]:
    from retrokit import kernels
    from retrokit.models import DRGATStack, batch_graphs
    from retrokit.rxn import read_dataset

    rng = np.random.default_rng(0)
    n_nodes = rows // 2
    x = rng.standard_normal((rows, width))
    idx = rng.integers(0, n_nodes, size=rows)
    vals = rng.standard_normal((rows, width))
    seg = np.sort(rng.integers(0, n_nodes, size=rows))

    out = {"backend": kernels.BACKEND}
    out["gather_rows"] = _time(lambda: kernels.gather_rows(x, idx), repeat)
    acc = np.zeros((n_nodes, width))
    out["scatter_add_rows"] = _time(
        lambda: kernels.scatter_add_rows(acc, idx, vals), repeat)
    out["segment_max"] = _time(
        lambda: kernels.segment_max(x[:, :8], seg, n_nodes), repeat)

    here = os.path.dirname(os.path.abspath(__file__))
    data = read_dataset(os.path.join(here, "..", "data", "mini_uspto.csv"))[:128]
    stack = DRGATStack(np.random.default_rng(1), width=128, n_layers=4, heads=4)
    batch = batch_graphs([r.product for r in data])

    def encode():
        h = stack(batch)
        h.backward(np.ones_like(h.data))
        stack.zero_grad()

    out["encoder_fwd_bwd"] = _time(encode, max(1, repeat // 3))
    return out


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--rows", type=int, default=200_000)
    parser.add_argument("--width", type=int, default=256)
    parser.add_argument("--repeat", type=int, default=9)
    parser.add_argument("--json", action="store_true",
                        help="print one backend's raw numbers (internal)")
    args = parser.parse_args()

    if args.json:
        print(json.dumps(run_backend(args.rows, args.width, args.repeat)))
        return 0

    results = {}
    for backend in ("c", "python"):
        env = dict(os.environ, RETROKIT_KERNELS=backend)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--json",
             "--rows", str(args.rows), "--width", str(args.width),
             "--repeat", str(args.repeat)],
            capture_output=True, text=True, env=env)
        if proc.returncode != 0:
            print(f"{backend}: failed\n{proc.stderr}", file=sys.stderr)
            if backend == "c":
                continue
            return 1
        results[backend] = json.loads(proc.stdout)

    if "c" not in results:
        print("compiled backend unavailable; python numbers only")
        for k, v in results["python"].items():
            if k != "backend":
                print(f"{k:20s} {v * 1e3:9.3f} ms")
        return 0

    print(f"rows={args.rows} width={args.width} (best of {args.repeat})")
    print(f"{'kernel':20s} {'c':>10s} {'python':>10s} {'speedup':>8s}")
    for name in ("gather_rows", "scatter_add_rows", "segment_max",
                 "encoder_fwd_bwd"):
        tc = results["c"][name]
        tp = results["python"][name]
        print(f"{name:20s} {tc * 1e3:9.3f}ms {tp * 1e3:9.3f}ms {tp / tc:7.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
