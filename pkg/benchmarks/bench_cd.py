"""Compare the compiled and pure-Python coordinate-descent backends.

Usage::

    python benchmarks/bench_cd.py [--n 100 200] [--repeat 1]

For each problem size and penalty setting, fits the kernel model with both
backends, reports the best-of-``repeat`` wall time and checks that both
reach the same objective.
"""
import argparse
import time

import numpy as np

from clearn import _backend
from clearn.data import gen_disk
from clearn.kernels import KernelSpec, gram, sigma_median_between_classes
from clearn.solver import TrainConfig, fit_kernel, fit_linear, objective

SETTINGS = [
    ("kernel", 1e-2, 0.5),
    ("kernel", 1e-3, 0.9),
    ("kernel", 1e-2, 0.0),
    ("linear", 1e-3, 0.5),
]


def _time_fit(fit, repeat):
    best = float("inf")
    model = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        model = fit()
        best = min(best, time.perf_counter() - t0)
    return best, model


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, nargs="+", default=[100])
    parser.add_argument("--repeat", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    backends = _backend.available()
    if "cython" not in backends:
        print("compiled backend not built; only the Python fallback is timed")
    header = f"{'n':>5} {'expansion':>9} {'gamma':>7} {'omega':>5} " + " ".join(
        f"{b + ' [s]':>12}" for b in backends
    )
    print(header + ("   speedup   |dF|" if len(backends) == 2 else ""))
    original = _backend.BACKEND
    try:
        for n in args.n:
            ds = gen_disk(n, seed=args.seed)
            spec = KernelSpec("rbf", sigma_median_between_classes(ds.X, ds.y))
            K = gram(spec, ds.X)
            for expansion, gamma, omega in SETTINGS:
                cfg = TrainConfig(gamma=gamma, omega=omega)
                times, objs = [], []
                for b in backends:
                    _backend.set_backend(b)
                    if expansion == "kernel":
                        t, m = _time_fit(lambda: fit_kernel(ds.X, ds.y, spec, cfg, K=K), args.repeat)
                        objs.append(objective(m, ds.X, ds.y, cfg, K=K))
                    else:
                        t, m = _time_fit(lambda: fit_linear(ds.X, ds.y, cfg), args.repeat)
                        objs.append(objective(m, ds.X, ds.y, cfg))
                    times.append(t)
                line = f"{n:>5} {expansion:>9} {gamma:>7.0e} {omega:>5.2f} " + " ".join(
                    f"{t:>12.4f}" for t in times
                )
                if len(times) == 2:
                    line += f"   {times[1] / times[0]:>7.1f}x  {abs(objs[0] - objs[1]):.1e}"
                print(line)
    finally:
        _backend.set_backend(original)


if __name__ == "__main__":
    main()
