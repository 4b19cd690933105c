"""Synthetic data from random modular additive-noise models.

Generation follows a fixed recipe: a random lower-triangular DAG, a random
lookup table per variable, one noise law shared by all variables, ancestral
sampling and a final random relabelling of the columns.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .modcore import Distribution


def make_rng(seed, *substream: int) -> np.random.Generator:
    """Generator for ``seed``, optionally on a deterministic child substream.

    ``make_rng(s, t)`` is independent of ``make_rng(s, u)`` for ``t != u`` and
    does not depend on how many other substreams were drawn. A tuple seed
    ``(s, t)`` is shorthand for ``make_rng(s, t, ...)``.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, tuple):
        seed, substream = seed[0], tuple(seed[1:]) + substream
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(substream))))


@dataclass
class CausalModel:
    """Ground truth in generation order plus the output column permutation.

    ``B[i, j] = 1`` means variable ``j`` is a parent of ``i``; ``B`` is strictly
    lower triangular. ``f_tables[i]`` is an integer array with one axis per
    parent (in increasing index order) and ``permutation[c]`` is the generation
    index of output column ``c``.
    """

    B: np.ndarray
    f_tables: list
    q: Distribution
    m: int
    permutation: np.ndarray

    @property
    def d(self) -> int:
        return self.B.shape[0]

    def parents(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.B[i])

    def truth_adjacency(self) -> np.ndarray:
        """Adjacency in output-column labelling."""
        P = self.permutation
        return self.B[np.ix_(P, P)]


def random_dag(d: int, p_a: float, seed=None) -> np.ndarray:
    if d < 1:
        raise ValueError("d must be >= 1")
    if not 0.0 <= p_a <= 1.0:
        raise ValueError("p_a must lie in [0, 1]")
    rng = make_rng(seed)
    return np.tril(rng.random((d, d)) < p_a, k=-1).astype(np.int8)


def random_functions(B, m: int, seed=None, injective: bool = True) -> list:
    """One uniformly random lookup table per variable.

    With ``injective`` a single-parent table is a random permutation of the
    residues instead.
    """
    rng = make_rng(seed)
    B = np.asarray(B)
    tables = []
    for i in range(B.shape[0]):
        k = int(B[i].sum())
        if k == 1 and injective:
            tables.append(rng.permutation(m).astype(np.int64))
        else:
            tables.append(rng.integers(0, m, size=(m,) * k, dtype=np.int64))
    return tables


def noise_spec(kind: str, m: int, seed=None, p: float | None = None, i: int | None = None) -> Distribution:
    """Shared noise law.

    ``"uniform-random"`` draws every ``q_j`` from U(0, 1) and normalizes.
    ``"two-point"`` puts ``p`` on residue ``i`` and ``1 - p`` on ``i + 1``; a
    missing ``p`` or ``i`` is drawn at random.
    """
    rng = make_rng(seed)
    if kind in ("uniform-random", "uniform"):
        return Distribution(rng.uniform(0.0, 1.0, size=m) + np.finfo(float).tiny, normalize=True)
    if kind in ("two-point", "twopoint"):
        if p is None:
            p = float(rng.uniform(0.0, 1.0))
            while p == 0.0:
                p = float(rng.uniform(0.0, 1.0))
        if not 0.0 < p < 1.0:
            raise ValueError(f"two-point weight must lie in (0, 1), got {p}")
        if i is None:
            i = int(rng.integers(m))
        q = np.zeros(m)
        q[i % m] = p
        q[(i + 1) % m] = 1.0 - p
        return Distribution(q)
    if kind in ("point", "noiseless"):
        return Distribution.point_mass(m, 0 if i is None else i)
    raise ValueError(f"unknown noise kind {kind!r}")


def random_model(d: int, m: int, p_a: float, q: Distribution, seed=None, injective: bool = True) -> CausalModel:
    rng = make_rng(seed)
    B = random_dag(d, p_a, rng)
    f = random_functions(B, m, rng, injective)
    perm = rng.permutation(d)
    return CausalModel(B, f, q, m, perm)


def sample(model: CausalModel, n: int, seed=None) -> np.ndarray:
    """``n`` rows by ancestral sampling, columns in output (permuted) order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = make_rng(seed)
    m = model.m
    X = np.empty((n, model.d), dtype=np.int64)
    for i in range(model.d):
        pa = model.parents(i)
        table = model.f_tables[i]
        fx = table[tuple(X[:, j] for j in pa)] if pa.size else np.full(n, table[()], dtype=np.int64)
        e = rng.choice(m, size=n, p=model.q.probs)
        X[:, i] = (fx + e) % m
    return X[:, model.permutation]


def simulate(d: int, m: int, n: int, p_a: float, noise: str = "uniform-random", seed=0,
             injective: bool = True, noise_p: float | None = None, noise_i: int | None = None):
    """Draw a model and a dataset from one seed; returns ``(data, model)``."""
    q = noise_spec(noise, m, make_rng(seed, 0), noise_p, noise_i)
    model = random_model(d, m, p_a, q, make_rng(seed, 1), injective)
    return sample(model, n, make_rng(seed, 2)), model


def column_names(d: int) -> list[str]:
    return [f"X{k + 1}" for k in range(d)]


def truth_record(model: CausalModel, seed=None) -> dict:
    return {
        "m": model.m,
        "d": model.d,
        "B": model.truth_adjacency().astype(int).tolist(),
        "permutation": model.permutation.astype(int).tolist(),
        "q": model.q.probs.tolist(),
        "seed": seed,
    }


def write_csv(path, data, names=None):
    data = np.asarray(data)
    names = names or column_names(data.shape[1])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        w.writerows(data.tolist())


def write_truth(path, model: CausalModel, seed=None):
    Path(path).write_text(json.dumps(truth_record(model, seed), indent=2) + "\n", encoding="utf-8")
