"""Compare the compiled and pure-Python leapfrog kernels.

Usage: python benchmarks/bench_leapfrog.py [--steps N] [--repeat K]
"""

import argparse
import timeit

import numpy as np

from cwflab.core_model import OrbitParams, System, turning_points
from cwflab.ensemble import _leapfrog_py


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    p = OrbitParams(System.KEPLER, E=-0.125, l=0.25, coupling=0.25)
    call = (0, p.m, p.coupling, p.l, turning_points(p).r_min, 0.0, 0.0, 4 * np.pi / args.steps, args.steps)
    kernels = {"python": _leapfrog_py.leapfrog}
    try:
        from cwflab.ensemble._leapfrog import leapfrog as compiled

        kernels["cython"] = compiled
    except ImportError:
        print("compiled kernel not built; timing the fallback only")

    times = {}
    for name, fn in kernels.items():
        times[name] = min(timeit.repeat(lambda: fn(*call), number=1, repeat=args.repeat))
        print(f"{name:>7}: {times[name] * 1e3:9.2f} ms for {args.steps} steps")
    if len(kernels) == 2:
        same = all(np.array_equal(a, b) for a, b in zip(kernels["python"](*call), kernels["cython"](*call)))
        print(f"speed-up {times['python'] / times['cython']:.1f}x, identical output: {same}")


if __name__ == "__main__":
    main()
