"""Hot inner loops, each in a numba-compiled and a plain numpy flavour.

The numba versions are used when numba imports cleanly and the environment
variable ``IMAN_NUMBA`` is not set to ``0``/``false``/``no``. Both flavours
must return identical results; ``tests/test_kernels.py`` checks that and
``benchmarks/bench_kernels.py`` times them against each other.
"""

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("IMAN_NUMBA", "1").strip().lower() not in (
    "0",
    "false",
    "no",
    "off",
)


# ----------------------------------------------------------------------------
# pure numpy

def count_cells_np(codes, size):
    return np.bincount(codes, minlength=size).astype(np.int64)


def g_batch_np(tables):
    """G statistic, used rows, used columns for each table in a (B, r, c) stack.

    Rows and columns with zero total are dropped, matching the
    ``0 * log 0 = 0`` convention.
    """
    t = np.asarray(tables, dtype=np.float64)
    rows = t.sum(axis=2)
    cols = t.sum(axis=1)
    n = rows.sum(axis=1)
    expected = rows[:, :, None] * cols[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(t > 0, t * n[:, None, None] / expected, 1.0)
        g = 2.0 * np.sum(np.where(t > 0, t * np.log(ratio), 0.0), axis=(1, 2))
    g = np.maximum(g, 0.0)
    return g, (rows > 0).sum(axis=1).astype(np.int64), (cols > 0).sum(axis=1).astype(np.int64)


def roll_rows_np(mat, shifts):
    """``out[r, v] = mat[r, (v - shifts[r]) % m]``, i.e. row r moved right by its shift."""
    m = mat.shape[1]
    idx = (np.arange(m)[None, :] - np.asarray(shifts)[:, None]) % m
    return np.take_along_axis(mat, idx, axis=1)


def shift_witness_np(R, tol):
    m = R.shape[0]
    cols = np.arange(m)
    # shifted[k, s, j] = R[k, (j + s) % m]
    shifted = R[:, (cols[None, :] + cols[:, None]) % m]
    for g0 in range(m):
        ref = shifted[0, g0]
        ok = np.all(np.abs(shifted - ref) <= tol + tol * np.abs(ref), axis=2)
        if np.all(ok.any(axis=1)):
            return np.argmax(ok, axis=1).astype(np.int64)
    return np.full(m, -1, dtype=np.int64)


# ----------------------------------------------------------------------------
# numba

if HAVE_NUMBA:

    @njit(cache=True)
    def count_cells_nb(codes, size):
        out = np.zeros(size, dtype=np.int64)
        for c in codes:
            out[c] += 1
        return out

    @njit(cache=True)
    def g_batch_nb(tables):
        nb, r, c = tables.shape
        g = np.zeros(nb)
        used_r = np.zeros(nb, dtype=np.int64)
        used_c = np.zeros(nb, dtype=np.int64)
        rows = np.empty(r)
        cols = np.empty(c)
        for b in range(nb):
            rows[:] = 0.0
            cols[:] = 0.0
            n = 0.0
            for i in range(r):
                for j in range(c):
                    x = tables[b, i, j]
                    rows[i] += x
                    cols[j] += x
                    n += x
            s = 0.0
            for i in range(r):
                if rows[i] > 0:
                    used_r[b] += 1
                for j in range(c):
                    x = tables[b, i, j]
                    if x > 0:
                        s += x * np.log(x * n / (rows[i] * cols[j]))
            for j in range(c):
                if cols[j] > 0:
                    used_c[b] += 1
            g[b] = max(2.0 * s, 0.0)
        return g, used_r, used_c

    @njit(cache=True)
    def roll_rows_nb(mat, shifts):
        nr, m = mat.shape
        out = np.empty_like(mat)
        for r in range(nr):
            s = shifts[r]
            for v in range(m):
                out[r, v] = mat[r, (v - s) % m]
        return out

    @njit(cache=True)
    def _rows_match(R, k, s, g0, tol):
        m = R.shape[0]
        for j in range(m):
            a = R[k, (j + s) % m]
            b = R[0, (j + g0) % m]
            if abs(a - b) > tol + tol * abs(b):
                return False
        return True

    @njit(cache=True)
    def shift_witness_nb(R, tol):
        # Walks g in lexicographic order. Whether row k can be aligned depends
        # only on g(0), so a failing row prunes every map sharing the prefix.
        m = R.shape[0]
        g = np.full(m, -1, dtype=np.int64)
        for g0 in range(m):
            g[0] = g0
            complete = True
            for k in range(1, m):
                g[k] = -1
                for s in range(m):
                    if _rows_match(R, k, s, g0, tol):
                        g[k] = s
                        break
                if g[k] < 0:
                    complete = False
                    break
            if complete:
                return g
        g[:] = -1
        return g


def _as_float3(tables):
    return np.ascontiguousarray(tables, dtype=np.float64)


def kernels(use_numba=None):
    """Return a namespace dict of kernel callables for the requested flavour."""
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba and HAVE_NUMBA:
        return {
            "count_cells": lambda codes, size: count_cells_nb(np.ascontiguousarray(codes, dtype=np.int64), size),
            "g_batch": lambda t: g_batch_nb(_as_float3(t)),
            "roll_rows": lambda mat, s: roll_rows_nb(np.ascontiguousarray(mat), np.ascontiguousarray(s, dtype=np.int64)),
            "shift_witness": lambda R, tol: shift_witness_nb(np.ascontiguousarray(R, dtype=np.float64), float(tol)),
        }
    return {
        "count_cells": count_cells_np,
        "g_batch": g_batch_np,
        "roll_rows": roll_rows_np,
        "shift_witness": shift_witness_np,
    }


_active = kernels()
count_cells = _active["count_cells"]
g_batch = _active["g_batch"]
roll_rows = _active["roll_rows"]
shift_witness = _active["shift_witness"]
