"""Compare the compiled kernels with the pure-Python fallback.

Usage:  python3 bench/bench_kernels.py [--repeat 3]
"""

from __future__ import annotations

import argparse
import time
from contextlib import contextmanager

from loopquant import _kernels_py, kernels
from loopquant.flow import act
from loopquant.potential import potential_to_tau
from loopquant.loopgrp import LoopElement
from loopquant.relations import builtin, evaluate_relation
from loopquant.series import Window, encode
from loopquant.vertex import product_vertex

try:
    from loopquant import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

NAMES = ("mul_terms", "derive_terms", "add_into")


@contextmanager
def backend(mod):
    saved = {n: getattr(kernels, n) for n in NAMES}
    for n in NAMES:
        setattr(kernels, n, getattr(mod, n))
    try:
        yield
    finally:
        for n, f in saved.items():
            setattr(kernels, n, f)


def best(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def workloads():
    w = Window(N=2, K=7, D=8, G=1, L=7)
    p = product_vertex(w)
    F0 = dict(p.F[0]._terms)
    F1 = dict(p.F[1]._terms)
    el = LoopElement.upper(2, {1: [[1, 2], [2, -3]], 2: [[0, 1], [-1, 0]]})
    image, _ = act(p, el)
    trr = builtin("TRR")
    big = Window(N=1, K=9, D=8, G=2, L=9)
    pb = product_vertex(big)
    return {
        "mul F0*F1 (N=2, D=8)": lambda: kernels.mul_terms(F0, F1, w.D, w.L, kernels.NO_CAP),
        "derive F0 by t^1_0 (x200)": lambda: [kernels.derive_terms(F0, encode(1, 0)) for _ in range(200)],
        "tau-form exp (N=1, G=2, D=8)": lambda: potential_to_tau(pb),
        "upper action on vertex": lambda: act(p, el),
        "TRR on an R-image": lambda: evaluate_relation(trr, image),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _compiled is None:
        print("compiled extension not available; build with `pip install --no-build-isolation -e .`")
        return
    print(f"{'workload':34s} {'compiled':>10s} {'python':>10s} {'speedup':>8s}")
    for name, fn in workloads().items():
        with backend(_compiled):
            tc = best(fn, args.repeat)
        with backend(_kernels_py):
            tp = best(fn, args.repeat)
        print(f"{name:34s} {tc:10.4f} {tp:10.4f} {tp / tc:8.2f}x")


if __name__ == "__main__":
    main()
