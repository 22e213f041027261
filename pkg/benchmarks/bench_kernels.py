"""Wall-clock comparison of the compiled and NumPy RK4 kernels.

    python benchmarks/bench_kernels.py [--N 256 1024 4096] [--steps 400]

Both kernels advance the same perturbed (stable) standing wave; the table reports
milliseconds per step, the speed-up and the maximum deviation between
the two final states.
"""
import argparse
import time

import numpy as np

from kgzlab import backend
from kgzlab import grid as g
from kgzlab import soliton as sol
from kgzlab.evolve import pack


def _time(kernel, y0, length, dt, steps, repeat):
    best = np.inf
    for _ in range(repeat):
        y = y0.copy()
        t0 = time.perf_counter()
        kernel.advance(y, length, dt, steps)
        best = min(best, time.perf_counter() - t0)
    return best, y


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--N", type=int, nargs="+", default=[256, 1024, 4096])
    p.add_argument("--L", type=float, default=60.0)
    p.add_argument("--steps", type=int, default=400)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    if backend.compiled_kernel is None:
        print("compiled kernel not built; only the NumPy kernel is available")
    print(f"{'N':>6} {'numpy ms/step':>14} {'fftw ms/step':>13} {'speed-up':>9} {'max |diff|':>11}")
    for N in args.N:
        grid = g.make_grid(args.L, N)
        y0 = pack(1.01 * sol.family(grid, 0.9).Phi)
        dt = 0.5 * grid.h * 0.9
        tp, yp = _time(backend.python_kernel, y0, args.L, dt, args.steps, args.repeat)
        row = f"{N:>6} {1e3 * tp / args.steps:>14.4f}"
        if backend.compiled_kernel is not None:
            tc, yc = _time(backend.compiled_kernel, y0, args.L, dt, args.steps, args.repeat)
            row += f" {1e3 * tc / args.steps:>13.4f} {tp / tc:>9.2f} {np.max(np.abs(yp - yc)):>11.2e}"
        print(row)


if __name__ == "__main__":
    main()
