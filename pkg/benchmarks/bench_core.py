"""Compare the compiled kernels with the numpy fallback.

Usage: python benchmarks/bench_core.py [--repeat 5]

Times J_n on a long argument array, the log I_n / log K_n table, tricubic
Hermite interpolation on a kernel grid and one full evaluation of the
V-state functional, reporting the best of ``repeat`` runs per backend and
the largest difference between the two results.
"""
import argparse
import time

import numpy as np

from artifact import _backend, _pycore
from artifact.contour import CollocationGrid, FourierShape, eval_F
from artifact.greenkernel import SpectralParams, build_smooth_grid


def best_of(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def max_diff(a, b):
    a = a if isinstance(a, tuple) else (a,)
    b = b if isinstance(b, tuple) else (b,)
    return max(float(np.max(np.abs(np.asarray(u) - np.asarray(v)))) for u, v in zip(a, b))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if "cython" not in _backend.available():
        raise SystemExit("compiled extension not built; run pip install -e . --no-build-isolation")
    from artifact import _ccore

    rng = np.random.default_rng(0)
    x = np.sort(rng.uniform(0.0, 300.0, 20000))
    xi = np.linspace(0.01, 120.0, 400)
    p = SpectralParams(0.5, 0.25)
    grid = build_smooth_grid(p, 0.625)
    q = [rng.uniform(0.0, 0.62, 200000), rng.uniform(0.0, 0.62, 200000),
         rng.uniform(0.0, np.pi, 200000)]
    cases = [
        ("jn(n=7, 2e4 points)", lambda m: m.jn(7, x)),
        ("log_ik(nmax=60, 400 points)", lambda m: m.log_ik(60, xi)),
        ("hermite3(2e5 points)", lambda m: m.hermite3(grid.data, (0.0, 0.0, 0.0), grid.step, *q)),
    ]
    print(f"{'kernel':32s} {'numpy [s]':>10s} {'cython [s]':>11s} {'speedup':>8s} {'max diff':>10s}")
    for name, fn in cases:
        tp, rp = best_of(lambda: fn(_pycore), args.repeat)
        tc, rc = best_of(lambda: fn(_ccore), args.repeat)
        print(f"{name:32s} {tp:10.4f} {tc:11.4f} {tp / tc:8.1f} {max_diff(rp, rc):10.2e}")

    shape = FourierShape(2, [0.004, 1e-4], 0.25)
    cgrid = CollocationGrid()
    res = {}
    for name in ("python", "cython"):
        _backend.use_backend(name)
        res[name] = best_of(lambda: eval_F(0.4, shape, cgrid, grid).F, args.repeat)
    _backend.use_backend("auto")
    tp, rp = res["python"]
    tc, rc = res["cython"]
    print(f"{'eval_F (M=64, N=12)':32s} {tp:10.4f} {tc:11.4f} {tp / tc:8.1f} {max_diff(rp, rc):10.2e}")


if __name__ == "__main__":
    main()
