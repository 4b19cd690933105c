"""Arithmetic and probability vectors over the cyclic domain {0, ..., m-1}."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

#: absolute/relative tolerance for every equality test between probabilities
TOL = 1e-9
#: entries at or below this are treated as outside the support
SUPPORT_EPS = 1e-12


def _is_prime(k: int) -> bool:
    if k < 2:
        return False
    f = 2
    while f * f <= k:
        if k % f == 0:
            return False
        f += 1
    return True


def prime_power_base(m: int) -> int | None:
    """Return ``p`` if ``m == p**k`` for a prime ``p`` and ``k >= 1``, else None."""
    if m < 2:
        return None
    p = 2
    while m % p:
        p += 1
    r = m
    while r % p == 0:
        r //= p
    return p if r == 1 else None


@dataclass(frozen=True)
class Modulus:
    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError(f"modulus must be an integer >= 2, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))

    @property
    def is_prime(self) -> bool:
        return _is_prime(self.m)

    @property
    def is_prime_power(self) -> bool:
        return prime_power_base(self.m) is not None

    def divisors(self) -> list[int]:
        return [c for c in range(1, self.m + 1) if self.m % c == 0]

    def __int__(self):
        return self.m


def _as_modulus(m) -> Modulus:
    return m if isinstance(m, Modulus) else Modulus(m)


@dataclass(frozen=True)
class ModValue:
    v: int
    m: Modulus

    def __post_init__(self):
        m = _as_modulus(self.m)
        object.__setattr__(self, "m", m)
        if not 0 <= self.v < m.m:
            raise ValueError(f"value {self.v} outside [0, {m.m})")

    def __int__(self):
        return self.v


def _check_same(a: ModValue, b: ModValue) -> Modulus:
    if a.m != b.m:
        raise ValueError(f"modulus mismatch: {a.m.m} vs {b.m.m}")
    return a.m


def mod_add(a: ModValue, b: ModValue) -> ModValue:
    m = _check_same(a, b)
    return ModValue((a.v + b.v) % m.m, m)


def mod_sub(a: ModValue, b: ModValue) -> ModValue:
    m = _check_same(a, b)
    return ModValue((a.v - b.v) % m.m, m)


class Distribution:
    """Probability vector over the ``m`` residues.

    Parameters
    ----------
    probs : sequence of float
        Non-negative weights. They must already sum to one (within 1e-12)
        unless ``normalize=True``.
    normalize : bool
        Rescale ``probs`` to unit sum before validating.
    """

    def __init__(self, probs: Sequence[float], normalize: bool = False):
        arr = np.array(probs, dtype=np.float64).ravel()
        if arr.size < 2:
            raise ValueError("a distribution needs at least two cells (m >= 2)")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("probabilities must be finite and non-negative")
        if normalize:
            s = arr.sum()
            if s <= 0:
                raise ValueError("cannot normalize an all-zero vector")
            arr = arr / s
        if abs(arr.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {arr.sum()!r}, not 1")
        arr.setflags(write=False)
        self._probs = arr

    @classmethod
    def uniform(cls, m: int) -> "Distribution":
        return cls(np.full(int(m), 1.0 / int(m)))

    @classmethod
    def point_mass(cls, m: int, j: int) -> "Distribution":
        arr = np.zeros(int(m))
        arr[j % int(m)] = 1.0
        return cls(arr)

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    @property
    def m(self) -> int:
        return self._probs.size

    @cached_property
    def modulus(self) -> Modulus:
        return Modulus(self.m)

    @cached_property
    def support(self) -> frozenset[int]:
        return frozenset(int(j) for j in np.flatnonzero(self._probs > SUPPORT_EPS))

    def __getitem__(self, j: int) -> float:
        return float(self._probs[j % self.m])

    def __len__(self):
        return self.m

    def __iter__(self):
        return iter(self._probs.tolist())

    def __eq__(self, other):
        if not isinstance(other, Distribution):
            return NotImplemented
        return self.m == other.m and np.array_equal(self._probs, other._probs)

    def __hash__(self):
        return hash(self._probs.tobytes())

    def __repr__(self):
        return f"Distribution({np.array2string(self._probs, precision=4, separator=', ')})"

    def shifted(self, a: int) -> "Distribution":
        """Law of ``Z + a`` when ``Z`` follows this distribution."""
        return Distribution(np.roll(self._probs, a))


def values_equal(a, b, tol: float = TOL) -> bool:
    return bool(np.allclose(a, b, rtol=tol, atol=tol))


def is_constant(values, tol: float = TOL) -> bool:
    v = np.asarray(values, dtype=np.float64)
    return v.size == 0 or values_equal(v, np.full(v.shape, v[0]), tol)


def c_period(q: Distribution) -> int:
    """Smallest ``c >= 1`` such that the support of ``q`` is invariant under ``+c``."""
    mask = q.probs > SUPPORT_EPS
    for c in Modulus(q.m).divisors():
        if np.array_equal(mask, np.roll(mask, -c)):
            return c
    return q.m  # unreachable: c = m always works


def is_periodic(values, c: int, tol: float = TOL) -> bool:
    """True if ``values[j] == values[j + c] == ...`` for every ``j < c``."""
    v = np.asarray(values, dtype=np.float64)
    m = v.size
    if m % c:
        raise ValueError(f"c={c} does not divide m={m}")
    return all(is_constant(v[j::c], tol) for j in range(c))


def is_balanced(p: Distribution, c: int, tol: float = TOL) -> bool:
    """Balanced condition of ``p`` with respect to a divisor ``c`` of ``m``.

    Row ``j`` (``0 <= j < c``) holds ``p[j + g(j)], p[j + c + g(j)], ...`` for an
    offset map ``g`` with values in ``{0, c, ..., m - c}``; after scaling every
    row to unit sum the rows must coincide for at least one ``g``. All
    ``(m/c)**c`` offset maps are tried.
    """
    m = p.m
    if c < 1 or m % c:
        raise ValueError(f"c={c} must be a positive divisor of m={m}")
    if c == 1:
        return True
    w = m // c
    probs = p.probs
    # rows[j, s] = p[j + l*c + s*c] normalized, for s the offset in units of c
    idx = (np.arange(c)[:, None] + c * np.arange(w)[None, :]) % m
    base = probs[idx]
    sums = base.sum(axis=1, keepdims=True)
    if np.any(sums <= 0):
        return False
    base = base / sums
    shifted = np.stack([np.roll(base, -s, axis=1) for s in range(w)], axis=1)  # (c, w, w)
    for g in itertools.product(range(w), repeat=c):
        rows = shifted[np.arange(c), list(g)]
        if values_equal(rows, np.broadcast_to(rows[0], rows.shape), tol):
            return True
    return False


def l1_distance(a: Distribution, b: Distribution) -> float:
    if a.m != b.m:
        raise ValueError(f"modulus mismatch: {a.m} vs {b.m}")
    return float(np.abs(a.probs - b.probs).sum())
