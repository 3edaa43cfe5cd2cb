"""Time the numba and numpy kernel backends on representative workloads.

    python3 benchmarks/bench_kernels.py [--repeat N]

Compile time for numba is excluded by a warm-up call. Each workload also
checks that the two backends return the same answer.
"""
import argparse
import time

import numpy as np

from starsis import kernels


def _settle_batch(k):
    rng = np.random.default_rng(0)
    m = 2000
    a = rng.uniform(0.05, 0.95, m)
    b = rng.uniform(0.05, 0.95, m)
    n = rng.choice([2, 3, 4, 8], m).astype(np.int64)
    x0, y0 = rng.uniform(0, 1, (2, m))
    nan = np.full(m, np.nan)
    return k.star_settle_batch(a, b, n, x0, y0, nan, nan, 0.0, 10**5, 1e-10)[0]


def _star_orbit(k):
    path = np.empty((0, 2))
    return k.star_orbit(0.5, 0.2500001, 4, 0.9, 0.9, 0.0, 0.0, 0.0, 200_000, -1.0, path)[0]


def _level_orbit(k):
    return k.level_orbit(0.5, 0.26, np.array([2, 2, 0]), np.ones(3), 200_000, 1e-12,
                         np.empty((0, 3)))[0]


def _mvt_grid(k):
    return k.mvt_lambda1_max(0.5, 0.2, 4, np.linspace(0.0, 1.0, 21))[0]


def _full_step(k):
    from starsis.model_core import build_multilevel_star

    topo = build_multilevel_star([20, 20, 5])
    indptr, indices = topo.csr()
    p = np.random.default_rng(1).uniform(0, 1, topo.node_count)
    for _ in range(200):
        p = k.full_step(indptr, indices, 0.5, 0.1, p, False)
    return p


WORKLOADS = {
    "settle batch (2000 runs)": _settle_batch,
    "single orbit (2e5 steps)": _star_orbit,
    "3-level orbit (near critical)": _level_orbit,
    "mean-value grid (21^4)": _mvt_grid,
    "full-graph step x200 (2121 nodes)": _full_step,
}


def best_of(fn, k, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(k)
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.NUMBA is None:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'workload':36s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s}  agree")
    for name, fn in WORKLOADS.items():
        fn(kernels.NUMBA)  # compile
        t_np, out_np = best_of(fn, kernels.NUMPY, args.repeat)
        t_nb, out_nb = best_of(fn, kernels.NUMBA, args.repeat)
        agree = np.allclose(out_np, out_nb, rtol=0, atol=1e-14)
        print(f"{name:36s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f}  {agree}")


if __name__ == "__main__":
    main()
