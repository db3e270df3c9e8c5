"""Compare the numba and numpy kernels on the two hot paths.

    python3 benchmarks/bench_kernels.py [--rows 1000000] [--repeat 5]

coset_index: reduce a batch of vectors modulo an HNF basis (return times,
orbit covers, OE checks). induced_maps: build the permutation tables of a
full-group depth image (enumerate_depth_image). Both backends must agree.
"""

import argparse
import time

import numpy as np

from odorigid import _kernels
from odorigid.lattice import lattice, matpow


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is unavailable (or ODORIGID_DISABLE_NUMBA is set); nothing to compare")

    rng = np.random.default_rng(0)
    L = lattice(matpow(((4, 1), (0, 1)), 6))
    hnf = np.array(L.basis, dtype=np.int64)
    strides = np.array(L.strides, dtype=np.int64)
    vecs = rng.integers(-10**6, 10**6, size=(args.rows, 2), dtype=np.int64)

    p, k, m = 64, 16, 200_000
    add = rng.integers(0, p, size=(p, p), dtype=np.int64)
    cell = rng.integers(0, k, size=p, dtype=np.int64)
    tq = rng.integers(0, p, size=(m, k), dtype=np.int64)

    # compile once before timing
    _kernels.coset_index_numba(vecs[:10], hnf, strides)
    _kernels.induced_maps_numba(add, cell, tq[:10])

    rows = []
    for name, nb, npf, a in (
        ("coset_index", _kernels.coset_index_numba, _kernels.coset_index_numpy, (vecs, hnf, strides)),
        ("induced_maps", _kernels.induced_maps_numba, _kernels.induced_maps_numpy, (add, cell, tq)),
    ):
        if not np.array_equal(nb(*a), npf(*a)):
            raise SystemExit(f"{name}: backends disagree")
        t_nb = best_of(lambda: nb(*a), args.repeat)
        t_np = best_of(lambda: npf(*a), args.repeat)
        rows.append((name, t_nb, t_np))

    print(f"{'kernel':<14}{'numba s':>10}{'numpy s':>10}{'speedup':>9}")
    for name, t_nb, t_np in rows:
        print(f"{name:<14}{t_nb:>10.4f}{t_np:>10.4f}{t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
