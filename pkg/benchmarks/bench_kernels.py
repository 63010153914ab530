"""Time the numba and numpy variants of each kernel on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 20]

The first numba call (compilation) is excluded from the timings. Results
are checked for agreement before anything is reported.
"""

import argparse
import time

import numpy as np

from ssrsim import _kernels
from ssrsim._accel import HAVE_NUMBA
from ssrsim.groups import build_group, irreps_of
from ssrsim.linalg import random_matrix, rng_for
from ssrsim.representations import RepSpace


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = rng_for(0)
    for name in ("z4", "s3", "d4", "q8"):
        g = build_group(name)
        irreps = irreps_of(g)
        rep = RepSpace.from_charges(irreps, {q: 3 for q in range(len(irreps))})
        m = random_matrix(rep.dim, rep.dim, rng)
        yield f"conjugate_stack {name} d={rep.dim}", "conjugate_stack", (rep.mats, m)
        yield f"twirl_sum {name} d={rep.dim}", "twirl_sum", (rep.mats, m)
        yield f"associativity {name} n={g.order}", "associativity_violation", (g.table,)
    g = build_group("z64")
    yield "associativity z64 n=64", "associativity_violation", (g.table,)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    print(f"numba available: {HAVE_NUMBA}; dispatch uses {_kernels.BACKEND}")
    print(f"{'case':36s} {'numpy':>12s} {'numba':>12s} {'ratio':>8s}")
    for label, kernel, inputs in cases():
        np_fn = getattr(_kernels, f"_{kernel}_np")
        nb_fn = getattr(_kernels, f"_{kernel}_nb")
        ref = np_fn(*inputs)
        got = nb_fn(*inputs)  # compiles on first call when numba is present
        if not np.allclose(ref, got, atol=1e-10):
            raise SystemExit(f"{label}: variants disagree")
        t_np = best_of(np_fn, inputs, args.repeat)
        t_nb = best_of(nb_fn, inputs, args.repeat)
        print(f"{label:36s} {t_np * 1e6:10.1f}us {t_nb * 1e6:10.1f}us {t_np / t_nb:8.2f}")


if __name__ == "__main__":
    main()
