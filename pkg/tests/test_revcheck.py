import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iman.modcore import Distribution, Modulus, is_balanced
from iman.revcheck import (
    UnsupportedModulusError,
    build_r_matrix,
    check_all,
    lemma_reversible,
    oracle_reversible,
    theorem_reversible,
    witness_is_valid,
)


def D(*xs):
    return Distribution(np.array(xs, dtype=float), normalize=True)


def brute_force_reverse(p, q, f=None, tol=1e-9):
    """First g in lexicographic order such that X - g(Y) is independent of Y.

    Built from the joint law of (X, Y) directly rather than from the R matrix.
    """
    m = p.m
    f = range(m) if f is None else f
    joint = np.zeros((m, m))
    for x in range(m):
        for e in range(m):
            joint[x, (f[x] + e) % m] += p[x] * q[e]
    py = joint.sum(axis=0)
    for g in itertools.product(range(m), repeat=m):
        # law of h = X - g(Y) given Y = y
        cond = np.zeros((m, m))
        for x in range(m):
            for y in range(m):
                cond[y, (x - g[y]) % m] += joint[x, y] / py[y]
        if np.allclose(cond, cond[0], rtol=tol, atol=tol):
            return g
    return None


def test_r_matrix_uniform():
    R = build_r_matrix(Distribution.uniform(3), Distribution.uniform(3))
    assert np.allclose(R.entries, 1 / 3)


def test_r_matrix_hand_m2():
    R = build_r_matrix(Distribution([0.3, 0.7]), Distribution([0.4, 0.6]))
    assert np.allclose(R.entries[0], np.array([0.12, 0.42]) / 0.54)
    assert np.allclose(R.entries[1], np.array([0.18, 0.28]) / 0.46)
    assert np.allclose(R.row_normalizers, [0.54, 0.46])


def test_r_matrix_rows_m3(rng):
    p = Distribution(rng.uniform(0.1, 1, 3), normalize=True)
    q = Distribution(rng.uniform(0.1, 1, 3), normalize=True)
    R = build_r_matrix(p, q)
    P, Q = p.probs, q.probs
    for k in range(3):
        C = P[0] * Q[k] + P[1] * Q[(k - 1) % 3] + P[2] * Q[(k - 2) % 3]
        assert np.allclose(R.entries[k], [P[0] * Q[k] / C, P[1] * Q[(k - 1) % 3] / C, P[2] * Q[(k - 2) % 3] / C])
    assert np.allclose(R.entries.sum(axis=1), 1, atol=1e-12)


def test_r_matrix_rejects_zero_p():
    with pytest.raises(ValueError):
        build_r_matrix(Distribution([0.0, 1.0]), Distribution.uniform(2))


def test_oracle_examples():
    q = D(0.3, 0.7)
    assert oracle_reversible(Distribution([0.5, 0.5]), q).reversible
    assert not oracle_reversible(D(0.2, 0.3, 0.5), D(0.1, 0.3, 0.6)).reversible


def test_oracle_example2_witness():
    p = D(1, 2, 1, 2, 1, 2)
    q = D(1, 2, 1, 1, 2, 1)
    v = oracle_reversible(p, q)
    assert v.reversible
    assert v.witness_g == (0, 4, 2, 0, 4, 2)
    assert witness_is_valid(build_r_matrix(p, q), v.witness_g)
    with pytest.raises(UnsupportedModulusError):
        theorem_reversible(p, q)


def test_oracle_refuses_large_m():
    with pytest.raises(ValueError):
        oracle_reversible(Distribution.uniform(9), Distribution.uniform(9))


def _random_case(rng, m):
    """Mix of random and structured (p, q) pairs."""
    kind = rng.integers(6)
    p = rng.uniform(0.05, 1, m)
    q = rng.uniform(0.05, 1, m)
    divs = Modulus(m).divisors()
    c = int(rng.choice(divs))
    if kind == 1:
        p = np.tile(rng.uniform(0.05, 1, c), m // c)
    elif kind == 2:
        q = np.tile(rng.uniform(0.05, 1, c), m // c)
    elif kind >= 3:
        mask = np.zeros(m)
        mask[rng.integers(m)::c] = 1
        q = q * mask
        if kind == 4:
            q = np.where(mask > 0, 1.0, 0.0)
        if kind == 5 and c > 1:
            # balanced p: row j is a rotated, rescaled copy of a common pattern
            w = m // c
            base = rng.uniform(0.05, 1, w)
            for j in range(c):
                s = rng.integers(w)
                scale = rng.uniform(0.5, 2)
                for l in range(w):
                    p[j + l * c] = base[(l + s) % w] * scale
    return Distribution(p, normalize=True), Distribution(q, normalize=True)


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_oracle_matches_joint_law_enumeration(m):
    rng = np.random.default_rng(100 + m)
    n_cases = {2: 60, 3: 60, 4: 40, 5: 12}[m]
    for _ in range(n_cases):
        p, q = _random_case(rng, m)
        v = oracle_reversible(p, q)
        g = brute_force_reverse(p, q)
        assert v.reversible == (g is not None), (p, q)
        if g is not None:
            assert v.witness_g == tuple(g)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 4, 5, 6]), st.integers(0, 2**32 - 1))
def test_witness_validity(m, seed):
    p, q = _random_case(np.random.default_rng(seed), m)
    v = oracle_reversible(p, q)
    if v.reversible:
        R = build_r_matrix(p, q)
        assert witness_is_valid(R, v.witness_g)
        shifted = R.shifted_left(v.witness_g)
        assert np.allclose(shifted, shifted[0], atol=1e-9)
        assert np.allclose(v.details["reverse_noise"].sum(), 1.0)


@pytest.mark.parametrize("m", [2, 3, 4, 5, 6])
def test_relabeling_invariance(m):
    rng = np.random.default_rng(7 + m)
    for _ in range(8):
        p, q = _random_case(rng, m)
        base = oracle_reversible(p, q).reversible
        for a in range(m):
            f = [(x + a) % m for x in range(m)]
            assert oracle_reversible(p, q, f=f).reversible == base


@pytest.mark.parametrize("m", [2, 3, 4])
def test_oracle_with_permutation_f_matches_enumeration(m):
    rng = np.random.default_rng(31 + m)
    for _ in range(10):
        p, q = _random_case(rng, m)
        f = rng.permutation(m).tolist()
        g = brute_force_reverse(p, q, f)
        assert oracle_reversible(p, q, f=f).reversible == (g is not None)


def test_theorem_examples():
    rng = np.random.default_rng(0)
    q = Distribution(rng.uniform(0.1, 1, 5), normalize=True)
    v = theorem_reversible(Distribution.uniform(5), q)
    assert v.reversible and v.matched_condition == "p-cyclic"
    p = D(0.1, 0.2, 0.2, 0.4)
    v = theorem_reversible(p, D(0, 0.5, 0, 0.5))
    assert v.reversible and v.matched_condition == "q-cyclic+P_c"
    assert oracle_reversible(p, D(0, 0.5, 0, 0.5)).reversible
    assert not theorem_reversible(D(0.1, 0.2, 0.3, 0.4), D(0.1, 0.2, 0.3, 0.4)).reversible


def test_point_mass_noise_is_reversible():
    for m in (2, 3, 4, 5, 7, 8):
        p = Distribution(np.arange(1, m + 1), normalize=True)
        for j in range(m):
            q = Distribution.point_mass(m, j)
            assert theorem_reversible(p, q).reversible
            assert oracle_reversible(p, q).reversible


def test_literal_reading_counterexample():
    # q has c(q) = m but is not a point mass: the literal c-only reading says
    # reversible, the shift-map search (and the m = 4 clause list) say not.
    p, q = D(0.1, 0.2, 0.3, 0.4), D(0.5, 0.5, 0, 0)
    assert theorem_reversible(p, q, literal=True).reversible
    assert not oracle_reversible(p, q).reversible
    assert not theorem_reversible(p, q).reversible
    assert not lemma_reversible(p, q).reversible


def test_literal_reading_counterexample_m8():
    # c(q) = 4 and p is 4-periodic, but supp(q) = {0, 1, 4, 5} spans two
    # residues mod 4: the shift-map search finds no reverse model
    p = D(1, 2, 3, 4, 1, 2, 3, 4)
    q = D(1, 2, 0, 0, 1, 2, 0, 0)
    assert theorem_reversible(p, q, literal=True).reversible
    assert not oracle_reversible(p, q).reversible
    assert not theorem_reversible(p, q).reversible


def test_subgroup_support_reversible():
    # m = 8: q lives on {1, 3} and p is 2-periodic
    p = D(1, 2, 1, 2, 1, 2, 1, 2)
    q = D(0, 1, 0, 1, 0, 0, 0, 0)
    assert oracle_reversible(p, q).reversible
    v = theorem_reversible(p, q)
    assert v.reversible and v.details["d"] == 2


@pytest.mark.parametrize("m", [2, 3, 5, 7])
def test_corollary_prime(m):
    rng = np.random.default_rng(m)
    for _ in range(200):
        p, q = _random_case(rng, m)
        v = theorem_reversible(p, q)
        expect = (
            np.allclose(p.probs, 1 / m, atol=1e-9)
            or np.allclose(q.probs, 1 / m, atol=1e-9)
            or len(q.support) == 1
        )
        assert v.reversible == expect


@pytest.mark.parametrize("m", [4, 8, 9])
def test_corollary_full_support(m):
    rng = np.random.default_rng(m)
    for _ in range(100):
        p = Distribution(rng.uniform(0.05, 1, m), normalize=True)
        q = Distribution(rng.uniform(0.05, 1, m), normalize=True)
        if rng.random() < 0.3:
            p = Distribution.uniform(m)
        elif rng.random() < 0.3:
            q = Distribution.uniform(m)
        expect = np.allclose(p.probs, 1 / m, atol=1e-9) or np.allclose(q.probs, 1 / m, atol=1e-9)
        assert theorem_reversible(p, q).reversible == expect


def test_lemma_examples():
    assert lemma_reversible(D(0.3, 0.7), Distribution([0.0, 1.0])).reversible
    assert lemma_reversible(D(0.2, 0.3, 0.5), Distribution.uniform(3)).reversible
    v = lemma_reversible(D(0.2, 0.2, 0.3, 0.3), Distribution.uniform(4))
    assert v.reversible and v.matched_condition == "q0=q1=q2=q3"
    with pytest.raises(ValueError):
        lemma_reversible(Distribution.uniform(5), Distribution.uniform(5))


@pytest.mark.parametrize("m", [2, 3, 4])
def test_lemma_theorem_oracle_agree(m):
    rng = np.random.default_rng(50 + m)
    for _ in range(300):
        p, q = _random_case(rng, m)
        r = check_all(p, q)
        assert r["agree"], (p, q, r)


def test_balanced_p_constructed_m8():
    p = D(1, 3, 2, 6, 1, 3, 2, 6)  # rows (p0,p2,p4,p6) and (p1,p3,p5,p7) proportional
    assert is_balanced(p, 2)
    q = D(0, 1, 0, 2, 0, 1, 0, 2)
    assert oracle_reversible(p, q).reversible == theorem_reversible(p, q).reversible
