"""Time the compiled and numpy shell-sum kernels on the same Bolza word ball.

    python3 benchmarks/bench_backends.py --word-length 10 --k 3,8,70
"""
import argparse
import time

import numpy as np

from hypbergman import _kernels_py
from hypbergman.groups import bolza_group, enumerate_elements
from hypbergman.hyperbolic import HPoint

try:
    from hypbergman import _kernels as compiled
except ImportError:
    compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--word-length", type=int, default=10)
    ap.add_argument("--cutoff", type=float, default=10.0)
    ap.add_argument("--k", default="3,8,70")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    z = HPoint(0.1, 0.9)
    t = time.perf_counter()
    elems = enumerate_elements(bolza_group(), args.word_length, prune=(z, args.cutoff))
    print(f"enumeration: {len(elems)} elements in {time.perf_counter() - t:.2f} s")
    m = np.ascontiguousarray(elems.matrices)
    shells = elems.shell_starts()

    backends = [("python", _kernels_py.series_shells)]
    if compiled is None:
        print("compiled backend not built; timing the numpy fallback only")
    else:
        backends.insert(0, ("cython", compiled.series_shells))

    print(f"{'k':>4} " + " ".join(f"{name:>12}" for name, _ in backends) + "   speedup  max rel diff")
    for k in (int(v) for v in args.k.split(",")):
        times, outs = [], []
        for _, fn in backends:
            times.append(best_of(lambda: fn(m, shells, z.x, z.y, k), args.repeat))
            outs.append(fn(m, shells, z.x, z.y, k)[0].sum(axis=0))
        row = f"{k:>4} " + " ".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) == 2:
            diff = np.max(np.abs(outs[0] - outs[1]) / np.abs(outs[1]))
            row += f"   {times[1] / times[0]:>6.1f}x  {diff:.1e}"
        print(row)


if __name__ == "__main__":
    main()
