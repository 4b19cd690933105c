"""Causal structure discovery for modular additive-noise models.

Sinks are peeled off one at a time: the variable whose conditional
distributions, once re-centred by the estimated function value, look alike
in every context is taken as the current sink; its parents are the variables
it still depends on given everything else. The sink is then summed out of
the frequency table and the loop repeats on the smaller table.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from . import _kernels
from . import freqtable as ftab
from .freqtable import FrequencyTable
from .indep import MIN_COUNT, bh_reject, g_independence_batch, g_statistic

log = logging.getLogger(__name__)


class InsufficientDataError(RuntimeError):
    """No candidate sink has a single context with enough observations."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message if step is None else f"step {step}: {message}")
        self.step = step


class ShiftUnavailable(ValueError):
    """A context used for shift estimation was never observed."""


@dataclass(frozen=True)
class SinkScore:
    var: Hashable
    g_value: float
    dof: int
    p_value: float
    strata_used: int
    coverage: float

    @property
    def informative(self) -> bool:
        return self.strata_used >= 2

    def key(self):
        g_per_dof = self.g_value / self.dof if self.dof else 0.0
        return (self.informative, self.p_value, -g_per_dof, self.coverage)


@dataclass
class DiscoveryResult:
    """Discovered causal order with parent sets.

    ``order`` runs from the first variable in causal order to the last, i.e.
    the reverse of the order in which sinks were removed.
    """

    variables: tuple
    order: list[tuple[Hashable, frozenset]]
    alpha: float
    diagnostics: list[dict] = field(default_factory=list)

    @property
    def causal_order(self) -> list:
        return [v for v, _ in self.order]

    @property
    def parents(self) -> dict:
        return {v: set(pa) for v, pa in self.order}

    def adjacency(self, variables: Sequence[Hashable] | None = None) -> np.ndarray:
        """``B[i, j] = 1`` iff ``variables[j]`` is a parent of ``variables[i]``."""
        variables = list(self.variables if variables is None else variables)
        pos = {v: k for k, v in enumerate(variables)}
        B = np.zeros((len(variables), len(variables)), dtype=np.int8)
        for v, pa in self.order:
            for u in pa:
                B[pos[v], pos[u]] = 1
        return B

    @classmethod
    def from_adjacency(cls, B, variables=None, alpha: float = 0.05) -> "DiscoveryResult":
        B = np.asarray(B)
        variables = tuple(range(B.shape[0]) if variables is None else variables)
        from .metrics import topological_order

        order = [(variables[i], frozenset(variables[j] for j in np.flatnonzero(B[i]))) for i in topological_order(B)]
        return cls(variables, order, alpha)

    def to_dot(self, name: str = "iman") -> str:
        """Graphviz digraph; isolated variables are listed as bare nodes."""
        def ident(v):
            return str(v) if str(v).isidentifier() else json.dumps(str(v))

        lines = [f"digraph {name} {{"]
        touched = {v for v, pa in self.order if pa} | {u for _, pa in self.order for u in pa}
        lines += [f"  {ident(v)};" for v in self.variables if v not in touched]
        for v, pa in self.order:
            for u in sorted(pa, key=self.variables.index):
                lines.append(f"  {ident(u)} -> {ident(v)};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "variables": [str(v) for v in self.variables],
            "alpha": self.alpha,
            "order": [{"sink": str(v), "parents": [str(u) for u in sorted(pa, key=self.variables.index)]} for v, pa in self.order],
            "adjacency": self.adjacency().tolist(),
            "diagnostics": self.diagnostics,
        }


def estimate_shift(ft: FrequencyTable, i: Hashable, ctx_ref: Mapping, ctx: Mapping) -> int:
    """Difference of the conditional modes of ``i`` under two contexts, mod ``m``.

    If ``i`` is a sink this estimates ``f(ctx_ref) - f(ctx)``. Ties in a mode
    resolve to the smallest value.
    """
    a = ftab.conditional_counts(ft, i, ctx_ref)
    b = ftab.conditional_counts(ft, i, ctx)
    if a.sum() == 0 or b.sum() == 0:
        raise ShiftUnavailable("context never observed")
    return int((np.argmax(a) - np.argmax(b)) % ft.m)


def _aligned_conditionals(cond: np.ndarray, min_count: int):
    totals = cond.sum(axis=1)
    usable = totals >= max(min_count, 1)
    if not usable.any():
        return cond[:0], usable
    ref = int(np.argmax(totals))
    modes = np.argmax(cond, axis=1)
    shifts = (modes[ref] - modes) % cond.shape[1]
    return _kernels.roll_rows(cond[usable], shifts[usable]), usable


def score_sink(ft: FrequencyTable, i: Hashable, min_count: int = MIN_COUNT) -> SinkScore:
    """Pooled homogeneity test of the re-centred conditionals of ``i``."""
    if ft.d == 1:
        return SinkScore(i, 0.0, 0, 1.0, 1, 1.0)
    cond = ftab.conditional_matrix(ft, i)
    aligned, usable = _aligned_conditionals(cond, min_count)
    res = g_statistic(aligned)
    coverage = float(cond[usable].sum()) / max(ft.total_n, 1)
    return SinkScore(i, res.g_value, res.dof, res.p_value, int(usable.sum()), coverage)


def find_sink(ft: FrequencyTable, V: Sequence[Hashable] | None = None, alpha: float = 0.05,
              min_count: int = MIN_COUNT, scores: list | None = None) -> Hashable:
    """Pick the candidate whose re-centred conditionals are most homogeneous.

    Candidates are ranked by (has >= 2 usable contexts, pooled p-value,
    -G/dof, sample coverage); the first of equals in ``V`` order wins.
    ``alpha`` is accepted for interface symmetry; ranking does not threshold.
    """
    V = list(ft.vars if V is None else V)
    if set(V) != set(ft.vars):
        raise ValueError("V must match the table's variables")
    if len(V) == 1:
        return V[0]
    all_scores = [score_sink(ft, i, min_count) for i in V]
    if scores is not None:
        scores.extend(all_scores)
    if all(s.strata_used == 0 for s in all_scores):
        worst = min(all_scores, key=lambda s: s.coverage)
        raise InsufficientDataError(
            f"no context reaches {min_count} observations for any candidate "
            f"(n={ft.total_n}, m^(d-1)={ft.m ** (ft.d - 1)}; e.g. {worst.var!r})"
        )
    best = max(range(len(V)), key=lambda k: (all_scores[k].key(), -k))
    return V[best]


def find_parent(ft: FrequencyTable, V: Sequence[Hashable] | None, i: Hashable, alpha: float = 0.05,
                min_count: int = MIN_COUNT, diag: dict | None = None) -> set:
    """Variables that stay dependent on ``i`` in at least one context.

    For every other ``j`` the ``(i, j)`` table is G-tested in each context
    over the remaining variables; contexts below ``min_count`` are left out
    and the rest are screened with Benjamini-Hochberg at level ``alpha``.
    """
    V = list(ft.vars if V is None else V)
    if i not in V:
        raise KeyError(f"{i!r} not among {V}")
    parents = set()
    for j in V:
        if j == i:
            continue
        g, dof, p, used = g_independence_batch(ftab.pair_tables(ft, i, j), min_count)
        rejected = bh_reject(p[used], alpha)
        if rejected.any():
            parents.add(j)
        if diag is not None:
            diag[str(j)] = {
                "tests": int(used.sum()),
                "rejected": int(rejected.sum()),
                "min_p": float(p[used].min()) if used.any() else 1.0,
            }
    return parents


def discover(data, m: int, alpha: float = 0.05, min_count: int = MIN_COUNT,
             variables: Sequence[Hashable] | None = None) -> DiscoveryResult:
    ft = ftab.build(data, m, variables)
    all_vars = ft.vars
    V = list(all_vars)
    removed = []
    diagnostics = []
    for step in range(len(V), 0, -1):
        scores: list[SinkScore] = []
        try:
            sink = find_sink(ft, V, alpha, min_count, scores)
        except InsufficientDataError as exc:
            raise InsufficientDataError(str(exc), step) from None
        pdiag: dict = {}
        parents = find_parent(ft, V, sink, alpha, min_count, pdiag)
        diagnostics.append({
            "step": step,
            "sink": str(sink),
            "scores": {
                str(s.var): {"g": s.g_value, "dof": s.dof, "p": s.p_value,
                             "strata": s.strata_used, "coverage": s.coverage}
                for s in scores
            },
            "parents": pdiag,
        })
        log.debug("step %d: sink %r parents %r", step, sink, parents)
        removed.append((sink, frozenset(parents)))
        V.remove(sink)
        if V:
            ft = ftab.marginalize(ft, sink)
    diagnostics.reverse()
    return DiscoveryResult(all_vars, removed[::-1], alpha, diagnostics)
