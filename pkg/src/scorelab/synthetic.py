"""Synthetic probability matrices for tests, benchmarks, and studies."""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError
from .metrics import ProbMatrix

KINDS = ("onehot-cycle", "uniform", "dirichlet", "heterogeneous")


def one_hot_cycle(n: int, k: int) -> ProbMatrix:
    """Row i is the one-hot vector for class i mod k."""
    rows = np.zeros((n, k), dtype=np.float64)
    rows[np.arange(n), np.arange(n) % k] = 1.0
    return ProbMatrix(rows, validate=False)


def uniform_rows(n: int, k: int) -> ProbMatrix:
    """Every row is the uniform distribution."""
    return ProbMatrix(np.full((n, k), 1.0 / k), validate=False)


def dirichlet_rows(n: int, k: int, alpha: float = 1.0, seed: int = 0) -> ProbMatrix:
    """IID Dirichlet(alpha, ..., alpha) rows."""
    if alpha <= 0:
        raise InvalidInputError(f"alpha must be positive, got {alpha}")
    rng = np.random.default_rng(seed)
    g = rng.gamma(alpha, size=(n, k))
    sums = g.sum(axis=1, keepdims=True)
    # tiny alpha can underflow an entire row to zero; fall back to uniform there
    bad = sums[:, 0] <= 0.0
    if np.any(bad):
        g[bad] = 1.0
        sums = g.sum(axis=1, keepdims=True)
    return ProbMatrix(g / sums, validate=False)


def heterogeneous_rows(
    n: int,
    k: int,
    seed: int = 0,
    sharp_fraction: float = 0.6,
    peak: float = 0.9,
    diffuse_alpha: float = 2.0,
) -> ProbMatrix:
    """Mixture of sharp and diffuse rows whose class profile drifts with index.

    Sharp rows put ``peak`` mass on a class that advances with row position
    (row i's class is floor(i * k / n)), diffuse rows are near-uniform
    Dirichlet draws. Because nearby rows share class profiles, small
    contiguous chunks see a much narrower marginal than the whole matrix:
    the split-protocol mean falls sharply as the split count grows, which is
    exactly the parameter sensitivity the split study exists to expose.
    """
    if not 0.0 <= sharp_fraction <= 1.0:
        raise InvalidInputError(f"sharp_fraction must lie in [0, 1], got {sharp_fraction}")
    if not 0.0 < peak < 1.0:
        raise InvalidInputError(f"peak must lie in (0, 1), got {peak}")
    rng = np.random.default_rng(seed)
    rows = np.empty((n, k), dtype=np.float64)

    sharp = rng.random(n) < sharp_fraction
    n_diffuse = int(n - sharp.sum())
    if n_diffuse:
        g = rng.gamma(diffuse_alpha, size=(n_diffuse, k))
        rows[~sharp] = g / g.sum(axis=1, keepdims=True)

    drift_class = (np.arange(n, dtype=np.int64) * k) // n
    sharp_idx = np.flatnonzero(sharp)
    rows[sharp_idx] = (1.0 - peak) / k
    rows[sharp_idx, drift_class[sharp_idx]] += peak
    return ProbMatrix(rows, validate=False)


def generate(kind: str, n: int, k: int, seed: int = 0, **kwargs) -> ProbMatrix:
    """Dispatch by kind name; kwargs pass through to the generator."""
    if kind == "onehot-cycle":
        return one_hot_cycle(n, k)
    if kind == "uniform":
        return uniform_rows(n, k)
    if kind == "dirichlet":
        return dirichlet_rows(n, k, seed=seed, **kwargs)
    if kind == "heterogeneous":
        return heterogeneous_rows(n, k, seed=seed, **kwargs)
    raise InvalidInputError(f"unknown matrix kind {kind!r}; choose from {KINDS}")


def random_matrix(rng: np.random.Generator, n: int, k: int, alpha: float = 0.5) -> ProbMatrix:
    """Dirichlet matrix from an existing generator; test-suite convenience."""
    g = rng.gamma(alpha, size=(n, k))
    sums = g.sum(axis=1, keepdims=True)
    bad = sums[:, 0] <= 0.0
    if np.any(bad):
        g[bad] = 1.0
        sums = g.sum(axis=1, keepdims=True)
    return ProbMatrix(g / sums, validate=False)
