"""Compiled vs numpy kernels, in isolation and inside a full occupancy trace.

    python benchmarks/bench_kernels.py [--balls N] [--j-max J] [--repeat R]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from sieve_lab import _pykernels, kernels
from sieve_lab.laws import parse_law
from sieve_lab.occupancy import simulate_trace
from sieve_lab.walks import SieveSource, WalkPath

try:
    from sieve_lab import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_accumulate(impl, path, exps, repeat):
    pos = path.positions
    def go():
        counts = np.zeros(pos.shape[0], np.int64)
        impl.accumulate_boxes(pos, exps, counts)
    return _best(go, repeat)


def bench_sup(impl, path, n, repeat):
    return _best(lambda: impl.sup_deviation(path.positions, 1.0, n), repeat)


def bench_trace(impl, j_max, repeat):
    saved = kernels.accumulate_boxes
    kernels.accumulate_boxes = impl.accumulate_boxes
    try:
        law = parse_law("uniform")
        return _best(lambda: simulate_trace(law, 11, j_max, diagnostics=False), repeat)
    finally:
        kernels.accumulate_boxes = saved


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--balls", type=int, default=1 << 20)
    ap.add_argument("--j-max", type=int, default=14)
    ap.add_argument("--repeat", type=int, default=5)
    a = ap.parse_args()

    rng = np.random.default_rng(3)
    exps = rng.standard_exponential(a.balls)
    path = WalkPath(SieveSource(parse_law("uniform")), 5).extend(float(exps.max()))
    sup_n = float(np.exp(16))
    path.extend(sup_n)

    impls = [("numpy", _pykernels)]
    if _ckernels is not None:
        impls.append(("cython", _ckernels))
    else:
        print("compiled extension not available; numpy only")

    rows = []
    for name, impl in impls:
        rows.append((
            name,
            bench_accumulate(impl, path, exps, a.repeat),
            bench_sup(impl, path, sup_n, a.repeat),
            bench_trace(impl, a.j_max, max(1, a.repeat // 2)),
        ))
    print(f"{'backend':8s} {'accumulate':>12s} {'sup':>12s} {'trace j=' + str(a.j_max):>14s}")
    for name, acc, sup, tr in rows:
        print(f"{name:8s} {acc:11.4f}s {sup:11.4f}s {tr:13.3f}s")
    if len(rows) == 2:
        (_, a0, s0, t0), (_, a1, s1, t1) = rows
        print(f"{'speedup':8s} {a0 / a1:11.1f}x {s0 / s1:11.1f}x {t0 / t1:12.1f}x")


if __name__ == "__main__":
    main()
