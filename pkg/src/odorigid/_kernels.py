"""Hot integer kernels with a numba path and a pure-numpy fallback.

Set ``ODORIGID_DISABLE_NUMBA=1`` to force the numpy path. Both paths operate
on int64 arrays; callers fall back to exact Python ints when magnitudes could
overflow (see ``fits_int64``).
"""

import os

import numpy as np

_INT64_SAFE = 2**62

try:
    if os.environ.get("ODORIGID_DISABLE_NUMBA", "").strip() not in ("", "0"):
        raise ImportError("disabled by ODORIGID_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag in a subprocess
    HAVE_NUMBA = False


def fits_int64(max_vec: int, max_basis: int, d: int) -> bool:
    return (abs(max_vec) + 1) * (abs(max_basis) + 1) * (d + 1) < _INT64_SAFE


# -- coset reduction --------------------------------------------------------


def reduce_rows_numpy(vecs, hnf):
    out = np.array(vecs, dtype=np.int64, copy=True)
    d = hnf.shape[0]
    for i in range(d):
        q = np.floor_divide(out[:, i], hnf[i, i])
        out[:, i:] -= q[:, None] * hnf[i:, i][None, :]
    return out


def label_index_numpy(labels, strides):
    return labels @ strides


if HAVE_NUMBA:

    @njit(cache=True)
    def reduce_rows_numba(vecs, hnf):
        out = vecs.copy()
        m, d = out.shape
        for r in range(m):
            for i in range(d):
                q = out[r, i] // hnf[i, i]
                if q != 0:
                    for j in range(i, d):
                        out[r, j] -= q * hnf[j, i]
        return out

    @njit(cache=True)
    def coset_index_numba(vecs, hnf, strides):
        m, d = vecs.shape
        out = np.empty(m, dtype=np.int64)
        row = np.empty(d, dtype=np.int64)
        for r in range(m):
            for j in range(d):
                row[j] = vecs[r, j]
            acc = 0
            for i in range(d):
                q = row[i] // hnf[i, i]
                if q != 0:
                    for j in range(i, d):
                        row[j] -= q * hnf[j, i]
                acc += row[i] * strides[i]
            out[r] = acc
        return out

    @njit(cache=True)
    def induced_maps_numba(add, cell, tq):
        m, _ = tq.shape
        p = cell.shape[0]
        out = np.empty((m, p), dtype=np.int64)
        for r in range(m):
            for x in range(p):
                out[r, x] = add[x, tq[r, cell[x]]]
        return out


def coset_index_numpy(vecs, hnf, strides):
    return label_index_numpy(reduce_rows_numpy(vecs, hnf), strides)


def induced_maps_numpy(add, cell, tq):
    p = cell.shape[0]
    return add[np.arange(p)[None, :], tq[:, cell]]


if HAVE_NUMBA:
    reduce_rows = reduce_rows_numba
    coset_index = coset_index_numba
    induced_maps = induced_maps_numba
else:
    reduce_rows = reduce_rows_numpy
    coset_index = coset_index_numpy
    induced_maps = induced_maps_numpy


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
