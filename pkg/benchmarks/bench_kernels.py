#!/usr/bin/env python3
"""Benchmark the compiled SGD kernel against the numpy fallback.

Times one epoch of minibatch SGD at the production shape (16-model
3-class panel, hidden 32, batch 25) and a full 20-epoch fusion training
run, on both backends when the extension is available.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from drgrade.fusion import TrainConfig, init_net, train
from drgrade.kernels import pure
from drgrade.simulator import PanelSpec, gen_labels, gen_panel
from drgrade.splitting import SplitSpec, stratified_split

try:
    from drgrade.kernels import _fast

    BACKENDS = {"fast": _fast, "pure": pure}
except ImportError:
    BACKENDS = {"pure": pure}


def bench_epoch(impl, repeats, n=513, d=48, h=32, k=3, batch=25):
    rng = np.random.Generator(np.random.PCG64(0))
    x = rng.dirichlet(np.ones(k), size=(n, d // k)).reshape(n, d)
    y = rng.integers(0, k, n)
    cw = np.ones(k)
    order = rng.permutation(n).astype(np.int64)
    net = init_net((d, h, k), seed=1)
    best = float("inf")
    for _ in range(repeats):
        w1, b1 = net.w1.copy(), net.b1.copy()
        w2, b2 = net.w2.copy(), net.b2.copy()
        t0 = time.perf_counter()
        impl.sgd_epoch(w1, b1, w2, b2, x, y, cw, order, batch, 0.01)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_full_train(backend_name, repeats):
    import importlib
    import os

    os.environ["DRGRADE_BACKEND"] = backend_name
    import drgrade.kernels as kernels

    importlib.reload(kernels)
    import drgrade.fusion as fusion

    importlib.reload(fusion)

    spec = PanelSpec(seed=3)
    labels = gen_labels(spec)
    panel = gen_panel(labels, spec)
    assignment = stratified_split(labels, SplitSpec(master_seed=1, resplit_seeds=(1,)))[0]
    tr = [panel.samples[i] for i in assignment.indices(0)]
    va = [panel.samples[i] for i in assignment.indices(1)]
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fusion.train(panel, tr, va, TrainConfig(seed=0))
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    print(f"{'kernel sgd_epoch (513x48, h32, batch25)':<45} best of {args.repeats}")
    times = {}
    for name, impl in BACKENDS.items():
        times[name] = bench_epoch(impl, args.repeats)
        print(f"  {name:<8} {times[name] * 1e3:9.3f} ms")
    if len(times) == 2:
        print(f"  speedup  {times['pure'] / times['fast']:9.2f} x")

    print(f"\n{'full fusion training (20 epochs, 16x611 panel)':<45} best of {args.repeats}")
    full = {}
    for name in BACKENDS:
        full[name] = bench_full_train(name, args.repeats)
        print(f"  {name:<8} {full[name] * 1e3:9.3f} ms")
    if len(full) == 2:
        print(f"  speedup  {full['pure'] / full['fast']:9.2f} x")


if __name__ == "__main__":
    main()
