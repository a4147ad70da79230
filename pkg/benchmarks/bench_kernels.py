"""Compiled versus numpy kernels on the two hot loops.

    python benchmarks/bench_kernels.py [--n 400] [--steps 2000] [--repeat 3]
"""

import argparse
import math
import time

import numpy as np

from slowmotion import kernels
from slowmotion.core import Grid, burgers_flux
from slowmotion.stationary import discrete_subsolution


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--n", type=int, default=400)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--sweeps", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    flux = burgers_flux()
    g = Grid(1.0, args.n)
    dx = g.dx
    x = g.nodes
    u0 = np.where(x < 0.4, -0.5 * np.sin(math.pi * x / 0.4), 0.5 * np.sin(math.pi * (x - 0.4) / 0.6))
    u0[0] = u0[-1] = 0.0
    eps = 0.05
    sub = discrete_subsolution(eps, flux, g).values
    backends = kernels.backends()

    print(f"n = {args.n}, backends: {', '.join(sorted(backends))} (active: {kernels.BACKEND})")
    print(f"{'kernel':<16}{'backend':<10}{'seconds':>10}{'per call (us)':>16}{'max diff':>12}")
    ref = {}
    for name in sorted(backends, reverse=True):
        mod = backends[name]
        t, out = best_of(lambda: kernels.imex_advance(u0, args.steps, 0.4 * dx, dx, eps, flux, backend=mod),
                         args.repeat)
        diff = float(np.max(np.abs(out - ref["imex"]))) if "imex" in ref else 0.0
        ref.setdefault("imex", out)
        print(f"{'imex_advance':<16}{name:<10}{t:>10.4f}{1e6 * t / args.steps:>16.2f}{diff:>12.2e}")
        t, out = best_of(lambda: kernels.monotone_sweeps(sub, eps, dx, 1.0, 3.0, flux, 0.0, args.sweeps,
                                                         backend=mod), args.repeat)
        diff = float(np.max(np.abs(out[0] - ref["mono"]))) if "mono" in ref else 0.0
        ref.setdefault("mono", out[0])
        print(f"{'monotone_sweeps':<16}{name:<10}{t:>10.4f}{1e6 * t / args.sweeps:>16.2f}{diff:>12.2e}")


if __name__ == "__main__":
    main()
