"""G-tests of homogeneity/independence and Benjamini-Hochberg control."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaincc

from . import _kernels

#: strata with fewer observations than this are left out of pooled tests
MIN_COUNT = 5


@dataclass(frozen=True)
class GTestResult:
    """Outcome of a likelihood-ratio (G) test.

    A degenerate test (fewer than two non-empty groups or outcome columns)
    has ``dof == 0``, ``g_value == 0`` and ``p_value == 1``: the data carry no
    evidence against homogeneity.
    """

    g_value: float
    dof: int
    p_value: float
    strata_used: int

    @property
    def degenerate(self) -> bool:
        return self.dof == 0


def chi2_sf(x: float, dof: int) -> float:
    """Upper tail ``P(chi2_dof > x)`` via the regularized upper incomplete gamma."""
    if dof < 1:
        raise ValueError("dof must be >= 1")
    if x <= 0:
        return 1.0
    return float(gammaincc(dof / 2.0, x / 2.0))


def chi2_sf_array(x, dof):
    x = np.asarray(x, dtype=np.float64)
    dof = np.asarray(dof, dtype=np.float64)
    out = np.ones(np.broadcast(x, dof).shape)
    ok = (dof >= 1) & (x > 0)
    if np.any(ok):
        xb, db = np.broadcast_arrays(x, dof)
        out[ok] = gammaincc(db[ok] / 2.0, xb[ok] / 2.0)
    return out


def _result(g: float, rows: int, cols: int, strata: int) -> GTestResult:
    if rows < 2 or cols < 2:
        return GTestResult(0.0, 0, 1.0, strata)
    dof = (rows - 1) * (cols - 1)
    return GTestResult(float(g), dof, chi2_sf(g, dof), strata)


def g_statistic(groups: Sequence[Sequence[int]], min_count: int = 0) -> GTestResult:
    """Pooled G test that every group shares one outcome distribution.

    ``groups`` is a ``(G, K)`` array of counts. Groups whose total is below
    ``min_count`` are dropped first. Degrees of freedom are counted from the
    non-empty groups and outcome columns only.
    """
    t = np.asarray(groups, dtype=np.float64)
    if t.ndim != 2:
        raise ValueError("groups must be a 2-D array of counts")
    if np.any(t < 0):
        raise ValueError("counts must be non-negative")
    keep = t.sum(axis=1) >= max(min_count, 1)
    t = t[keep]
    if t.shape[0] == 0:
        return GTestResult(0.0, 0, 1.0, 0)
    g, rows, cols = _kernels.g_batch(t[None])
    return _result(g[0], int(rows[0]), int(cols[0]), int(t.shape[0]))


def g_independence_batch(tables, min_count: int = MIN_COUNT):
    """G independence test for each ``r x c`` table in a stack.

    Returns ``(g, dof, p, used)`` arrays; tables with total below
    ``min_count`` have ``used == False`` and ``p == 1``. Degenerate tables
    get ``dof == 0`` and ``p == 1``.
    """
    t = np.asarray(tables, dtype=np.float64)
    used = t.sum(axis=(1, 2)) >= max(min_count, 1)
    g, rows, cols = _kernels.g_batch(t)
    dof = np.where((rows >= 2) & (cols >= 2), (rows - 1) * (cols - 1), 0)
    g = np.where(dof > 0, g, 0.0)
    p = chi2_sf_array(g, dof)
    p = np.where(used, p, 1.0)
    return g, dof, p, used


def bh_reject(p_values, alpha: float = 0.05) -> np.ndarray:
    """Benjamini-Hochberg step-up; boolean rejection mask in input order."""
    p = np.asarray(p_values, dtype=np.float64).ravel()
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    M = p.size
    reject = np.zeros(M, dtype=bool)
    if M == 0:
        return reject
    if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
        raise ValueError("p-values must lie in [0, 1]")
    order = np.argsort(p, kind="stable")
    below = p[order] <= alpha * np.arange(1, M + 1) / M
    if below.any():
        k = np.flatnonzero(below).max()
        reject[order[: k + 1]] = True
    return reject
