"""Scores comparing an estimated adjacency matrix with the true one.

Both matrices use ``B[i, j] = 1`` for an edge ``j -> i``.
"""

import heapq

import numpy as np


def _check_pair(B, B_hat):
    B = np.asarray(B)
    B_hat = np.asarray(B_hat)
    if B.ndim != 2 or B.shape[0] != B.shape[1] or B.shape != B_hat.shape:
        raise ValueError(f"need two square matrices of equal size, got {B.shape} and {B_hat.shape}")
    if np.any(np.diag(B)) or np.any(np.diag(B_hat)):
        raise ValueError("adjacency matrices must have zero diagonals")
    return (B != 0), (B_hat != 0)


def topological_order(B) -> list[int]:
    """Parents-first order of a DAG; ties go to the smaller index."""
    B = np.asarray(B) != 0
    d = B.shape[0]
    indeg = B.sum(axis=1).astype(int)
    ready = [i for i in range(d) if indeg[i] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        j = heapq.heappop(ready)
        order.append(j)
        for i in np.flatnonzero(B[:, j]):
            indeg[i] -= 1
            if indeg[i] == 0:
                heapq.heappush(ready, int(i))
    if len(order) != d:
        raise ValueError("adjacency matrix contains a cycle")
    return order


def ero(B, B_hat) -> float:
    """Share of estimated edges pointing against the true causal order.

    Rows and columns are reordered so that ``B`` becomes lower triangular;
    the nonzero entries of the reordered ``B_hat`` above the diagonal are
    counted and divided by ``d(d-1)/2``.
    """
    B, B_hat = _check_pair(B, B_hat)
    d = B.shape[0]
    if d < 2:
        raise ValueError("need d >= 2")
    order = topological_order(B)
    Bp = B_hat[np.ix_(order, order)]
    return float(np.triu(Bp, k=1).sum()) / (d * (d - 1) / 2)


def acc(B, B_hat) -> float:
    """Share of off-diagonal entries on which the two matrices agree."""
    B, B_hat = _check_pair(B, B_hat)
    d = B.shape[0]
    if d < 2:
        return 1.0
    off = ~np.eye(d, dtype=bool)
    return float((B == B_hat)[off].sum()) / (d * (d - 1))
