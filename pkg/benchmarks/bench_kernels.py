"""Compare the compiled and numpy level-set kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--funnel]

Times one upwind step on 1D and 2D grids for both backends, checks that the
results agree, and optionally times a full cone funnel.
"""
import argparse
import time

import numpy as np

from funnelkit import kernels
from funnelkit.geometry import Grid, point_set
from funnelkit.inclusion import disk_velocity_set, propagate_funnel


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--funnel", action="store_true", help="also time a 256x256 cone funnel")
    args = ap.parse_args()
    try:
        kernels._select("cython")
        backends = ["python", "cython"]
    except ImportError:
        backends = ["python"]
        print("compiled kernel not built; timing the numpy fallback only")
    rng = np.random.default_rng(0)
    cases = [
        ("1D n=4096 m=2", rng.normal(size=4096), rng.normal(size=(4096, 2))),
        ("2D 256^2 m=9", rng.normal(size=(256, 256)), rng.normal(size=(256, 256, 9, 2))),
        ("2D 512^2 m=33", rng.normal(size=(512, 512)), rng.normal(size=(512, 512, 33, 2))),
    ]
    print(f"{'case':<18}" + "".join(f"{b:>12}" for b in backends) + "     speedup   max|diff|")
    for name, phi, vel in cases:
        res = {}
        for b in backends:
            res[b] = best_of(lambda: kernels.hj_step(phi, vel, 0.3, backend=b), args.repeat)
        line = f"{name:<18}" + "".join(f"{res[b][0] * 1e3:10.2f}ms" for b in backends)
        if len(backends) == 2:
            diff = float(np.abs(res["python"][1] - res["cython"][1]).max())
            line += f"  {res['python'][0] / res['cython'][0]:9.1f}x  {diff:10.2e}"
        print(line)
    if args.funnel:
        g = Grid.box((-1.5, -1.5), (1.5, 1.5), 256)
        K = point_set(g, (0.0, 0.0))
        F = disk_velocity_set((0.0, 0.0), 1.0)
        for b in backends:
            t, _ = best_of(lambda: propagate_funnel(F, K, 0.0, 1.0, 0.01, backend=b), 1)
            print(f"cone funnel 256^2, 100 steps, {b}: {t:.2f}s")


if __name__ == "__main__":
    main()
