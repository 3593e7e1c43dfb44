"""Compare the numba and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat N]

Times cycle evaluation on a dense grid and one 120-period RK4 integration
of the stock equation, and checks that both backends agree.
"""

import argparse
import time

import numpy as np

from hybridgame import _kernels
from hybridgame.model import Structure, reference_params
from hybridgame.oracle import build_mesh
from hybridgame.strategies import build_profile


def best_of(fn, repeat):
    fn()  # warm-up (includes jit compilation)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    params = reference_params()
    inflow = build_profile(params, Structure.PI1).inflow
    coef, rate = inflow.arrays
    t = np.linspace(0.0, 120.0, 2_000_001)
    mesh = build_mesh(params.T, params.tau, 0.0, 120.0, 10_000)
    kappa = np.array([-params.delta1, -params.delta2])
    rk_args = (mesh.seg_t0, mesh.seg_dt, mesh.seg_n, mesh.seg_base, mesh.seg_phase, 0.0, coef, rate, kappa)

    cases = {
        "eval_cycle": (
            lambda: _kernels.eval_cycle_numba(coef, rate, params.T, params.split, t),
            lambda: _kernels.eval_cycle_numpy(coef, rate, params.T, params.split, t),
        ),
        "rk4_linear": (
            lambda: _kernels.rk4_linear_numba(*rk_args),
            lambda: _kernels.rk4_linear_numpy(*rk_args),
        ),
    }
    print(f"{'kernel':<12s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s} {'max diff':>10s}")
    for name, (fast, ref) in cases.items():
        if not _kernels.HAVE_NUMBA:
            print(f"{name:<12s} numba unavailable")
            continue
        diff = float(np.max(np.abs(fast() - ref())))
        tn, tp = best_of(fast, args.repeat), best_of(ref, args.repeat)
        print(f"{name:<12s} {tn:10.4f} {tp:10.4f} {tp / tn:8.2f} {diff:10.2e}")


if __name__ == "__main__":
    main()
