"""Dense joint frequency tables over ``M^|V|``.

A table is a C-ordered ``numpy`` array with one axis of length ``m`` per
variable, so the flat index of a cell is its mixed-radix code
``x_1 m^(d-1) + ... + x_d``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

from . import _kernels

#: refuse to allocate tables with more cells than this
MAX_CELLS = 10**8


class DataError(ValueError):
    """Input data cannot be turned into a frequency table."""


@dataclass(frozen=True)
class FrequencyTable:
    counts: np.ndarray
    vars: tuple
    m: int

    @property
    def total_n(self) -> int:
        return int(self.counts.sum())

    @property
    def d(self) -> int:
        return len(self.vars)

    def axis(self, var: Hashable) -> int:
        try:
            return self.vars.index(var)
        except ValueError:
            raise KeyError(f"unknown variable {var!r}; table has {list(self.vars)}") from None


def _check_size(m: int, d: int):
    if float(m) ** d > MAX_CELLS:
        raise DataError(f"frequency table would need m^d = {m}^{d} cells (limit {MAX_CELLS:.0e})")


def build(data, m: int, vars: Sequence[Hashable] | None = None) -> FrequencyTable:
    """Count every distinct row of an ``n x d`` integer sample matrix.

    Raises :class:`DataError` for empty input or any value outside
    ``[0, m)``; the message names the first offending row and column.
    """
    arr = np.asarray(data)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise DataError("need a non-empty n x d sample matrix")
    n, d = arr.shape
    if d == 0:
        raise DataError("sample matrix has no columns")
    if vars is None:
        vars = tuple(range(d))
    vars = tuple(vars)
    if len(vars) != d or len(set(vars)) != d:
        raise DataError(f"need {d} distinct variable names, got {vars!r}")
    if m < 2:
        raise DataError(f"modulus must be >= 2, got {m}")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            bad = np.argwhere(~np.isfinite(arr) | (arr != np.round(arr)))[0]
            raise DataError(f"non-integer value at row {bad[0]}, column {vars[bad[1]]!r}")
    arr = arr.astype(np.int64)
    out_of_range = (arr < 0) | (arr >= m)
    if out_of_range.any():
        r, c = np.argwhere(out_of_range)[0]
        raise DataError(f"value {arr[r, c]} at row {r}, column {vars[c]!r} is outside [0, {m})")
    _check_size(m, d)
    radix = m ** np.arange(d - 1, -1, -1, dtype=np.int64)
    codes = arr @ radix
    counts = _kernels.count_cells(codes, m**d).reshape((m,) * d)
    return FrequencyTable(counts, vars, m)


def marginalize(ft: FrequencyTable, var: Hashable) -> FrequencyTable:
    """Sum out ``var``."""
    if ft.d < 2:
        raise ValueError("cannot marginalize the last remaining variable")
    ax = ft.axis(var)
    return FrequencyTable(ft.counts.sum(axis=ax), ft.vars[:ax] + ft.vars[ax + 1:], ft.m)


def conditional_counts(ft: FrequencyTable, target: Hashable, ctx: Mapping[Hashable, int]) -> np.ndarray:
    """Counts of ``target = 0..m-1`` within the context ``ctx``.

    ``ctx`` must assign every variable except ``target``. An unobserved
    context gives an all-zero vector.
    """
    ax = ft.axis(target)
    rest = set(ft.vars) - {target}
    if set(ctx) != rest:
        raise ValueError(f"context must assign exactly {sorted(map(str, rest))}, got {sorted(map(str, ctx))}")
    index = []
    for v in ft.vars:
        if v == target:
            index.append(slice(None))
        else:
            x = int(ctx[v])
            if not 0 <= x < ft.m:
                raise ValueError(f"context value {x} for {v!r} outside [0, {ft.m})")
            index.append(x)
    return np.array(ft.counts[tuple(index)], dtype=np.int64)


def conditional_matrix(ft: FrequencyTable, target: Hashable) -> np.ndarray:
    """All conditional count vectors of ``target`` at once.

    Row ``r`` is the context whose mixed-radix code over the remaining
    variables (in table order) equals ``r``; shape ``(m^(d-1), m)``.
    """
    ax = ft.axis(target)
    return np.moveaxis(ft.counts, ax, -1).reshape(-1, ft.m)


def pair_tables(ft: FrequencyTable, a: Hashable, b: Hashable) -> np.ndarray:
    """``(a, b)`` contingency tables for every context over the other variables.

    Shape ``(m^(d-2), m, m)`` with axis 1 indexing ``a`` and axis 2 ``b``.
    """
    ia, ib = ft.axis(a), ft.axis(b)
    if ia == ib:
        raise ValueError("need two distinct variables")
    return np.moveaxis(ft.counts, (ia, ib), (-2, -1)).reshape(-1, ft.m, ft.m)


def decode_context(ft: FrequencyTable, exclude: Sequence[Hashable], code: int) -> dict:
    """Inverse of the row numbering used by :func:`conditional_matrix`/:func:`pair_tables`."""
    rest = [v for v in ft.vars if v not in set(exclude)]
    out = {}
    for v in reversed(rest):
        code, out[v] = divmod(code, ft.m)
    return {v: out[v] for v in rest}
