"""Reversibility of the bivariate modular additive-noise model ``Y = f(X) + e``.

Three independent routes decide whether a reverse model ``X = g(Y) + h`` with
``h`` independent of ``Y`` exists:

* :func:`oracle_reversible` searches shift maps ``g`` over the matrix of reverse
  conditionals ``P(X = i | Y = k)`` (any modulus up to 8);
* :func:`theorem_reversible` evaluates a closed-form condition on the
  periodicity of ``p`` and ``q`` (prime-power moduli);
* :func:`lemma_reversible` evaluates the enumerated clause lists for m = 2, 3, 4.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .modcore import (
    SUPPORT_EPS,
    TOL,
    Distribution,
    Modulus,
    c_period,
    is_balanced,
    is_constant,
    is_periodic,
    values_equal,
)

#: largest modulus the shift-map search accepts (m**m candidate maps)
ORACLE_MAX_M = 8


class UnsupportedModulusError(ValueError):
    """The closed-form condition only covers prime-power moduli."""


@dataclass(frozen=True)
class RMatrix:
    entries: np.ndarray
    row_normalizers: np.ndarray
    p: Distribution
    q: Distribution

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    def shifted_left(self, g) -> np.ndarray:
        """Matrix whose row ``k`` is row ``k`` of ``entries`` moved left by ``g[k]``."""
        m = self.m
        idx = (np.arange(m)[None, :] + np.asarray(g)[:, None]) % m
        return np.take_along_axis(self.entries, idx, axis=1)


@dataclass(frozen=True)
class ReversibilityVerdict:
    reversible: bool
    method: str
    witness_g: tuple[int, ...] | None = None
    matched_condition: str | None = None
    details: dict = field(default_factory=dict, compare=False)

    def __bool__(self):
        return self.reversible


def _check_pair(p: Distribution, q: Distribution) -> int:
    if p.m != q.m:
        raise ValueError(f"modulus mismatch: p has m={p.m}, q has m={q.m}")
    if np.any(p.probs <= SUPPORT_EPS) or np.any(p.probs >= 1.0):
        raise ValueError("cause distribution must satisfy 0 < p_i < 1 for every i")
    return p.m


def build_r_matrix(p: Distribution, q: Distribution, f=None) -> RMatrix:
    """Reverse conditionals ``r[k, i] = P(X = i | Y = k)``.

    With the default identity ``f`` this is ``p_i q_{k-i} / C_k``. A
    permutation ``f`` of ``range(m)`` gives ``p_i q_{k - f(i)} / C_k``.
    """
    m = _check_pair(p, q)
    f = np.arange(m) if f is None else np.asarray(f, dtype=np.int64)
    if sorted(f.tolist()) != list(range(m)):
        raise ValueError("f must be a permutation of range(m)")
    k = np.arange(m)[:, None]
    joint = p.probs[None, :] * q.probs[(k - f[None, :]) % m]
    C = joint.sum(axis=1)
    return RMatrix(joint / C[:, None], C, p, q)


def oracle_reversible(p: Distribution, q: Distribution, tol: float = TOL, f=None) -> ReversibilityVerdict:
    """Search every shift map ``g`` for one that makes all rows of ``R`` identical.

    Maps are visited in lexicographic order and the first witness is returned.
    Prefixes that cannot be completed are skipped, which never changes the
    answer of the full ``m**m`` enumeration.
    """
    if p.m > ORACLE_MAX_M:
        raise ValueError(f"oracle search is limited to m <= {ORACLE_MAX_M}; got m={p.m}")
    R = build_r_matrix(p, q, f)
    g = _kernels.shift_witness(R.entries, tol)
    if g[0] < 0:
        return ReversibilityVerdict(False, "oracle")
    witness = tuple(int(x) for x in g)
    noise = R.shifted_left(witness)[0]
    return ReversibilityVerdict(
        True, "oracle", witness_g=witness, matched_condition="row-shift", details={"reverse_noise": noise}
    )


def witness_is_valid(R: RMatrix, g, tol: float = TOL) -> bool:
    T = R.shifted_left(g)
    return values_equal(T, np.broadcast_to(T[0], T.shape), tol)


def _single_residue(support, d: int) -> bool:
    return len({j % d for j in support}) == 1


def theorem_reversible(p: Distribution, q: Distribution, literal: bool = False) -> ReversibilityVerdict:
    """Closed-form reversibility test for prime-power moduli.

    Reversible iff for some divisor ``d`` of ``m`` the support of ``q`` lies in
    a single residue class mod ``d`` and either ``p`` is ``d``-periodic, or
    ``q`` is ``d``-periodic and ``p`` is balanced w.r.t. ``d``. ``d = 1``
    gives the "``p`` uniform or ``q`` uniform" clause; ``d = m`` with a point
    mass ``q`` is always reversible.

    ``literal=True`` evaluates the condition only at ``d = c(q)`` without the
    residue-class requirement. That reading calls every ``q`` with
    ``c(q) = m`` reversible, e.g. ``q = (.5, .5, 0, 0)`` for any ``p``,
    which the shift-map search refutes; it is kept for comparison only.
    """
    m = _check_pair(p, q)
    if not Modulus(m).is_prime_power:
        raise UnsupportedModulusError(f"m={m} is not a prime power")
    c = c_period(q)
    if literal:
        candidates = [c]
    else:
        support = sorted(q.support)
        candidates = [d for d in Modulus(m).divisors() if _single_residue(support, d)]
    for d in candidates:
        if is_periodic(p.probs, d):
            return ReversibilityVerdict(True, "theorem", matched_condition="p-cyclic", details={"c": c, "d": d})
        if is_periodic(q.probs, d) and is_balanced(p, d):
            return ReversibilityVerdict(True, "theorem", matched_condition="q-cyclic+P_c", details={"c": c, "d": d})
    return ReversibilityVerdict(False, "theorem", details={"c": c})


def _eq(*xs) -> bool:
    return is_constant(np.array(xs, dtype=np.float64))


def _zero(*xs) -> bool:
    return all(x <= SUPPORT_EPS for x in xs)


def _one(x) -> bool:
    return abs(x - 1.0) <= TOL


def _balanced_m4(p) -> bool:
    p0, p1, p2, p3 = p
    # p1/p2 = p3/p0  or  p1/p0 = p3/p2, cross-multiplied
    return _eq(p1 * p0, p3 * p2) or _eq(p1 * p2, p3 * p0)


def _lemma_clauses(p, q):
    m = len(p)
    if m == 2:
        return [
            ("p1=1/2", lambda: _eq(p[1], 0.5)),
            ("q1=1/2", lambda: _eq(q[1], 0.5)),
            ("q1=0", lambda: _zero(q[1])),
            ("q1=1", lambda: _one(q[1])),
        ]
    if m == 3:
        return [
            ("p0=p1=p2", lambda: _eq(*p)),
            ("q0=q1=q2", lambda: _eq(*q)),
            ("q0=1", lambda: _one(q[0])),
            ("q1=1", lambda: _one(q[1])),
            ("q2=1", lambda: _one(q[2])),
        ]
    return [
        ("p0=p1=p2=p3", lambda: _eq(*p)),
        ("q0=q1=q2=q3", lambda: _eq(*q)),
        ("q0=q2=0,p0=p2,p1=p3", lambda: _zero(q[0], q[2]) and _eq(p[0], p[2]) and _eq(p[1], p[3])),
        ("q0=q2=0,q1=q3,P2", lambda: _zero(q[0], q[2]) and _eq(q[1], q[3]) and _balanced_m4(p)),
        ("q1=q3=0,p0=p2,p1=p3", lambda: _zero(q[1], q[3]) and _eq(p[0], p[2]) and _eq(p[1], p[3])),
        ("q1=q3=0,q0=q2,P2", lambda: _zero(q[1], q[3]) and _eq(q[0], q[2]) and _balanced_m4(p)),
        ("q0=1", lambda: _one(q[0])),
        ("q1=1", lambda: _one(q[1])),
        ("q2=1", lambda: _one(q[2])),
        ("q3=1", lambda: _one(q[3])),
    ]


def lemma_reversible(p: Distribution, q: Distribution) -> ReversibilityVerdict:
    m = _check_pair(p, q)
    if m not in (2, 3, 4):
        raise ValueError(f"enumerated clause lists exist only for m in (2, 3, 4); got m={m}")
    for name, clause in _lemma_clauses(p.probs.tolist(), q.probs.tolist()):
        if clause():
            return ReversibilityVerdict(True, "lemma", matched_condition=name)
    return ReversibilityVerdict(False, "lemma")


def check_all(p: Distribution, q: Distribution, tol: float = TOL) -> dict:
    """Run every applicable route; used by the CLI report.

    Returns a dict with keys ``theorem``, ``lemma``, ``oracle`` (a verdict or
    ``None`` when the route does not apply) and ``agree``.
    """
    out: dict = {"theorem": None, "lemma": None, "oracle": None}
    try:
        out["theorem"] = theorem_reversible(p, q)
    except UnsupportedModulusError:
        pass
    if p.m in (2, 3, 4):
        out["lemma"] = lemma_reversible(p, q)
    if p.m <= ORACLE_MAX_M:
        out["oracle"] = oracle_reversible(p, q, tol)
    verdicts = {v.reversible for v in out.values() if v is not None}
    out["agree"] = len(verdicts) <= 1
    return out
