import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iman.modcore import (
    Distribution,
    ModValue,
    Modulus,
    c_period,
    is_balanced,
    is_periodic,
    l1_distance,
    mod_add,
    mod_sub,
    prime_power_base,
)


def mv(v, m):
    return ModValue(v, Modulus(m))


@pytest.mark.parametrize("a,b,m,expected", [(3, 2, 4, 1), (1, 1, 2, 0), (6, 5, 7, 4)])
def test_mod_add_examples(a, b, m, expected):
    assert mod_add(mv(a, m), mv(b, m)).v == expected


def test_mod_add_modulus_mismatch():
    with pytest.raises(ValueError, match="mismatch"):
        mod_add(mv(1, 3), mv(1, 4))


def test_modvalue_range():
    with pytest.raises(ValueError):
        mv(4, 4)
    with pytest.raises(ValueError):
        Modulus(1)


@pytest.mark.parametrize("m", range(2, 17))
def test_group_laws_exhaustive(m):
    vals = [mv(v, m) for v in range(m)]
    zero = mv(0, m)
    for a, b in itertools.product(vals, repeat=2):
        s = mod_add(a, b)
        assert (a.v + b.v - s.v) % m == 0
        assert s == mod_add(b, a)
        assert mod_sub(s, b) == a
    for a in vals:
        assert mod_add(a, zero) == a
    for a, b, c in itertools.product(vals[: min(m, 6)], repeat=3):
        assert mod_add(mod_add(a, b), c) == mod_add(a, mod_add(b, c))


@pytest.mark.parametrize("m,base", [(2, 2), (4, 2), (8, 2), (9, 3), (7, 7), (6, None), (12, None), (25, 5)])
def test_prime_power(m, base):
    assert prime_power_base(m) == base
    assert Modulus(m).is_prime_power == (base is not None)


def test_distribution_validation():
    with pytest.raises(ValueError):
        Distribution([0.5, 0.6])
    with pytest.raises(ValueError):
        Distribution([-0.1, 1.1])
    d = Distribution([1, 3], normalize=True)
    assert d.probs.tolist() == [0.25, 0.75]
    with pytest.raises(ValueError):
        d.probs[0] = 1.0


def test_shifted_is_law_of_translate():
    d = Distribution([0.1, 0.2, 0.7])
    assert d.shifted(1).probs.tolist() == [0.7, 0.1, 0.2]


@pytest.mark.parametrize(
    "q,c",
    [
        ([1 / 8] * 8, 1),
        ([0, 0.25, 0, 0.25, 0, 0.25, 0, 0.25], 2),
        ([0, 0, 0, 1, 0, 0, 0, 0], 8),
        ([0, 0.5, 0, 0.5], 2),
        ([0.3, 0.7, 0, 0], 4),
    ],
)
def test_c_period_examples(q, c):
    assert c_period(Distribution(q)) == c


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 12).flatmap(lambda m: st.lists(st.booleans(), min_size=m, max_size=m)))
def test_c_period_divides_m(mask):
    if not any(mask):
        mask[0] = True
    q = Distribution(np.array(mask, dtype=float), normalize=True)
    c = c_period(q)
    m = len(mask)
    assert m % c == 0
    s = q.support
    assert {(j + c) % m for j in s} == s
    assert all({(j + k) % m for j in s} != s for k in range(1, c))


@pytest.mark.parametrize("m", [2, 3, 4, 6, 8])
def test_c_period_point_mass(m):
    for j in range(m):
        assert c_period(Distribution.point_mass(m, j)) == m


def test_is_balanced_examples():
    assert is_balanced(Distribution([0.1, 0.2, 0.2, 0.4], normalize=True), 2)
    assert not is_balanced(Distribution([0.1, 0.2, 0.3, 0.4]), 2)
    with pytest.raises(ValueError):
        is_balanced(Distribution.uniform(4), 3)


def _balanced_oracle(p, c):
    """Direct transcription: rows p[j + g(j) + l c], l = 0..m/c-1, normalized."""
    m = len(p)
    w = m // c
    for g in itertools.product(range(0, m, c), repeat=c):
        rows = []
        for j in range(c):
            row = np.array([p[(j + g[j] + l * c) % m] for l in range(w)])
            rows.append(row / row.sum())
        if all(np.allclose(r, rows[0], rtol=1e-9, atol=1e-9) for r in rows):
            return True
    return False


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([(4, 2), (6, 2), (6, 3), (8, 2), (8, 4), (9, 3)]), st.integers(0, 2**32 - 1))
def test_is_balanced_matches_transcription(mc, seed):
    m, c = mc
    rng = np.random.default_rng(seed)
    p = rng.uniform(0.05, 1, m)
    if seed % 2:
        # make it balanced by construction: row j is a shifted copy of row 0, rescaled
        w = m // c
        base = rng.uniform(0.05, 1, w)
        for j in range(c):
            shift = rng.integers(w)
            for l in range(w):
                p[j + l * c] = base[(l + shift) % w] * (j + 1)
    p = Distribution(p, normalize=True)
    assert is_balanced(p, c) == _balanced_oracle(p.probs, c)


@pytest.mark.parametrize("m", [2, 4, 6, 8, 9, 12])
def test_balanced_trivial_cases(m, rng):
    p = Distribution(rng.uniform(0.1, 1, m), normalize=True)
    assert is_balanced(p, 1)
    for c in Modulus(m).divisors():
        assert is_balanced(Distribution.uniform(m), c)


def test_is_periodic():
    assert is_periodic([0.1, 0.4, 0.1, 0.4], 2)
    assert not is_periodic([0.1, 0.4, 0.2, 0.3], 2)
    with pytest.raises(ValueError):
        is_periodic([0.25] * 4, 3)


def test_l1_distance():
    a = Distribution([0.5, 0.5])
    assert l1_distance(a, a) == 0
    assert l1_distance(Distribution.point_mass(3, 0), Distribution.point_mass(3, 2)) == 2
    assert l1_distance(a, Distribution([0.6, 0.4])) == pytest.approx(0.2)
    with pytest.raises(ValueError):
        l1_distance(a, Distribution.uniform(3))
