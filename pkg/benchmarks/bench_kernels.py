"""Time the face kernels and a full step: numba vs pure numpy.

    python3 benchmarks/bench_kernels.py --resolution 256 --order 2
"""
import argparse
import time

import numpy as np

from swme import kernels
from swme._backend import HAVE_NUMBA
from swme.models import ModelVariant, matrix_forms
from swme.scenarios import dam_break
from swme.solver import SolverConfig, Stepper, apply_bc


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--resolution", type=int, default=256)
    ap.add_argument("--order", type=int, default=2)
    ap.add_argument("--variant", default="HSWME")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    sc = dam_break(args.resolution)
    state = sc.initial_state(args.order)
    variant = ModelVariant.parse(args.variant)
    form = matrix_forms(variant, args.order)[0]
    n = state.U.shape[-1]
    G = apply_bc(state.U, sc.bc)
    UL = np.ascontiguousarray(G[:-1, 1:-1].reshape(-1, n))
    UR = np.ascontiguousarray(G[1:, 1:-1].reshape(-1, n))
    s = kernels.speeds_numpy(UL, UR, 1, 3, 1.0, 1.0)
    print(f"faces={UL.shape[0]} n={n} variant={variant.name}")

    t_np = best_of(lambda: kernels.fluctuations_numpy(UL, UR, s, form, 1.0), args.repeat)
    print(f"fluctuations numpy  {t_np * 1e3:8.2f} ms")
    if HAVE_NUMBA:
        kernels.fluctuations_numba(UL, UR, s, form, 1.0)  # compile
        t_nb = best_of(lambda: kernels.fluctuations_numba(UL, UR, s, form, 1.0), args.repeat)
        print(f"fluctuations numba  {t_nb * 1e3:8.2f} ms  speedup {t_np / t_nb:5.1f}x")
        a = kernels.fluctuations_numpy(UL, UR, s, form, 1.0)
        b = kernels.fluctuations_numba(UL, UR, s, form, 1.0)
        print(f"max |numba - numpy| {max(np.abs(x - y).max() for x, y in zip(a, b)):.2e}")

    stepper = Stepper(SolverConfig(1.0, variant, 0.9, sc.bc, sc.source), args.order)
    t_step = best_of(lambda: stepper.step(state), args.repeat)
    print(f"full step (active backend: {kernels.face_fluctuations.__name__}) {t_step * 1e3:8.2f} ms")


if __name__ == "__main__":
    main()
