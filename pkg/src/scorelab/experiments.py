"""Diagnostic studies: split-count sensitivity, entropy profiles, top classes.

These are the scripted analyses behind the toolkit's main claims: the
split-protocol mean is not a single number but a function of n_splits; the
conditional-entropy profile separates sharp from diffuse matrices; and the
marginal's top classes reveal what the classifier actually thinks the
samples are.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .metrics import (
    LN2,
    ProbMatrix,
    SplitSpec,
    _rows_entropy,
    entropy_decomposition,
    inception_score,
    marginal_of,
)

# Standard split grid for the sensitivity study.
DEFAULT_SPLIT_GRID = (1, 2, 5, 10, 20, 50, 100, 200)


@dataclass(frozen=True)
class SplitStudyRow:
    n_splits: int
    mean: float
    std: float


@dataclass(frozen=True)
class SplitStudyResult:
    rows: tuple[SplitStudyRow, ...]
    source: str

    def as_dict(self) -> dict:
        return {
            "source": self.source,
            "rows": [
                {"n_splits": r.n_splits, "mean": r.mean, "std": r.std} for r in self.rows
            ],
        }


def split_study(
    matrix: ProbMatrix,
    split_counts: list[int] | tuple[int, ...] = DEFAULT_SPLIT_GRID,
    remainder_policy: str = "reject",
    shuffle_seed: int | None = None,
    source: str = "",
) -> SplitStudyResult:
    """Score the matrix once per split count; deterministic given inputs."""
    if not split_counts:
        raise InvalidInputError("split_counts must be non-empty")
    rows = []
    for n_splits in split_counts:
        spec = SplitSpec(n_splits=n_splits, remainder_policy=remainder_policy)
        report = inception_score(matrix, spec, seed=shuffle_seed)
        rows.append(SplitStudyRow(n_splits=n_splits, mean=report.mean, std=report.std))
    return SplitStudyResult(rows=tuple(rows), source=source)


@dataclass(frozen=True)
class EntropyStudyResult:
    """Bits-denominated entropy diagnostics plus a per-row entropy histogram."""

    mean_conditional_entropy_bits: float
    marginal_entropy_bits: float
    mutual_information_bits: float
    histogram_counts: tuple[int, ...]
    histogram_edges_bits: tuple[float, ...]

    def as_dict(self) -> dict:
        return {
            "mean_conditional_entropy_bits": self.mean_conditional_entropy_bits,
            "marginal_entropy_bits": self.marginal_entropy_bits,
            "mutual_information_bits": self.mutual_information_bits,
            "histogram_counts": list(self.histogram_counts),
            "histogram_edges_bits": list(self.histogram_edges_bits),
        }


def entropy_study(matrix: ProbMatrix, bins: int = 10) -> EntropyStudyResult:
    """Conditional/marginal entropy in bits and a row-entropy histogram.

    Histogram buckets cover [0, log2 K] bits, the full range a K-class
    distribution can occupy.
    """
    if bins < 1:
        raise InvalidInputError(f"bins must be positive, got {bins}")
    decomp = entropy_decomposition(matrix)
    row_bits = _rows_entropy(matrix.rows) / LN2
    top = math.log2(matrix.class_count)
    counts, edges = np.histogram(row_bits, bins=bins, range=(0.0, top))
    return EntropyStudyResult(
        mean_conditional_entropy_bits=decomp.mean_conditional_entropy_bits,
        marginal_entropy_bits=decomp.marginal_entropy_bits,
        mutual_information_bits=decomp.mutual_information_bits,
        histogram_counts=tuple(int(c) for c in counts),
        histogram_edges_bits=tuple(float(e) for e in edges),
    )


def top_classes(matrix: ProbMatrix, k: int) -> list[tuple[int, float]]:
    """Classes ranked by marginal probability, descending; ties by index."""
    if not 1 <= k <= matrix.class_count:
        raise InvalidInputError(
            f"k must lie in [1, {matrix.class_count}], got {k}"
        )
    marginal = marginal_of(matrix).probs
    # stable sort on the negated marginal leaves ties in ascending-index order
    order = np.argsort(-marginal, kind="stable")[:k]
    return [(int(i), float(marginal[i])) for i in order]
