"""Inception Score family metrics over classifier probability matrices.

Everything here is a pure function of an (N, K) matrix whose rows are the
conditional class distributions p(y|x) a classifier assigned to N samples.
Three quantities are computed:

  * the classic exponentiated score under a split protocol,
        exp( mean_i KL(row_i || chunk marginal) )  per chunk,
  * the improved (log-scale) score,
        mean_i KL(row_i || global marginal),
    which is batching-invariant and equals the plug-in mutual information
    between sample identity and predicted class,
  * the entropy decomposition  I(y;x) = H(y) - H(y|x).

All logarithms are natural; reports carry bit conversions (nats / ln 2)
alongside. Scores are bounded: 1 <= exponentiated score <= K.
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass

import numpy as np
from scipy.special import rel_entr, xlogy

from .errors import InvalidInputError

# Tolerance for "entries sum to 1" on validated distributions.
SUM_TOL = 1e-9

# Denominator entries are clamped to this floor before logs inside KL, so a
# zero marginal probability never produces inf. Numerator zeros contribute 0.
KL_EPS = 1e-12

# Row-block size for streaming passes over large matrices; bounds temporary
# allocations to ~64 MB at K=1000.
_BLOCK_ROWS = 8192

REMAINDER_REJECT = "reject"
REMAINDER_ABSORB = "last-split-absorbs"

LN2 = math.log(2.0)


def _as_prob_vector(probs, tol: float = SUM_TOL) -> np.ndarray:
    arr = np.asarray(probs, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidInputError(f"expected a 1-D probability vector, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidInputError("empty probability vector")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("probability vector contains non-finite entries")
    if np.any(arr < 0):
        raise InvalidInputError("probability vector contains negative entries")
    total = float(arr.sum())
    if abs(total - 1.0) > tol:
        raise InvalidInputError(f"probabilities sum to {total!r}, not 1 within {tol}")
    return arr


@dataclass(frozen=True, eq=False)
class ClassDistribution:
    """A single point on the K-class probability simplex."""

    probs: np.ndarray
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool) -> None:
        if validate:
            arr = _as_prob_vector(self.probs)
        else:
            arr = np.asarray(self.probs, dtype=np.float64)
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def k(self) -> int:
        return self.probs.shape[0]

    def __repr__(self) -> str:
        return f"ClassDistribution(k={self.k})"


@dataclass(frozen=True, eq=False)
class ProbMatrix:
    """N conditional class distributions, one per sample, as an (N, K) array.

    Rows must each satisfy the ClassDistribution invariants; N >= 1, K >= 2.
    Optional ``labels`` attach a sample identifier to each row.
    """

    rows: np.ndarray
    labels: tuple[str, ...] | None = None
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool) -> None:
        arr = np.asarray(self.rows, dtype=np.float64)
        if arr.ndim != 2:
            raise InvalidInputError(f"expected a 2-D matrix, got shape {arr.shape}")
        n, k = arr.shape
        if n < 1:
            raise InvalidInputError("matrix must have at least one row")
        if k < 2:
            raise InvalidInputError(f"matrix must have at least two classes, got K={k}")
        if validate:
            if not np.all(np.isfinite(arr)):
                raise InvalidInputError("matrix contains non-finite entries")
            if np.any(arr < 0):
                bad = int(np.argwhere(np.any(arr < 0, axis=1))[0, 0])
                raise InvalidInputError(f"row {bad} contains negative entries")
            sums = arr.sum(axis=1)
            off = np.abs(sums - 1.0) > SUM_TOL
            if np.any(off):
                bad = int(np.argmax(off))
                raise InvalidInputError(
                    f"row {bad} sums to {sums[bad]!r}, not 1 within {SUM_TOL}"
                )
        if self.labels is not None and len(self.labels) != n:
            raise InvalidInputError(
                f"got {len(self.labels)} labels for {n} rows"
            )
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "rows", arr)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def class_count(self) -> int:
        return self.rows.shape[1]

    def row(self, i: int) -> ClassDistribution:
        return ClassDistribution(self.rows[i], validate=False)

    def __repr__(self) -> str:
        return f"ProbMatrix(n={self.n}, k={self.class_count})"


@dataclass(frozen=True)
class SplitSpec:
    """How to partition the N rows into chunks for the split protocol.

    ``remainder_policy`` decides what happens when n_splits does not divide N:
    ``reject`` raises, ``last-split-absorbs`` gives the trailing chunk the
    leftover rows.
    """

    n_splits: int = 10
    remainder_policy: str = REMAINDER_REJECT

    def __post_init__(self) -> None:
        if self.n_splits < 1:
            raise InvalidInputError(f"n_splits must be positive, got {self.n_splits}")
        if self.remainder_policy not in (REMAINDER_REJECT, REMAINDER_ABSORB):
            raise InvalidInputError(
                f"unknown remainder policy {self.remainder_policy!r}"
            )

    def chunk_bounds(self, n: int) -> list[tuple[int, int]]:
        """Contiguous (start, stop) row ranges for each chunk."""
        if self.n_splits > n:
            raise InvalidInputError(
                f"n_splits={self.n_splits} exceeds the matrix row count {n}"
            )
        base, rem = divmod(n, self.n_splits)
        if rem and self.remainder_policy == REMAINDER_REJECT:
            raise InvalidInputError(
                f"{n} rows do not divide evenly into {self.n_splits} splits "
                f"(remainder {rem}); use remainder policy "
                f"{REMAINDER_ABSORB!r} to allow this"
            )
        bounds = [(i * base, (i + 1) * base) for i in range(self.n_splits)]
        if rem:
            lo, _ = bounds[-1]
            bounds[-1] = (lo, n)
        return bounds


@dataclass(frozen=True)
class ScoreReport:
    """Per-split exponentiated scores plus their mean and population std."""

    per_split_scores: tuple[float, ...]
    mean: float
    std: float
    n_splits: int
    n: int
    k: int
    log_base: str = "e"

    def as_dict(self) -> dict:
        return {
            "per_split_scores": list(self.per_split_scores),
            "mean": self.mean,
            "std": self.std,
            "n_splits": self.n_splits,
            "n": self.n,
            "k": self.k,
            "log_base": self.log_base,
        }


@dataclass(frozen=True)
class EntropyReport:
    """H(y), H(y|x) and their difference, in nats and bits."""

    marginal_entropy: float
    mean_conditional_entropy: float
    mutual_information: float
    marginal_entropy_bits: float
    mean_conditional_entropy_bits: float
    mutual_information_bits: float

    @classmethod
    def from_nats(cls, marginal: float, conditional: float) -> "EntropyReport":
        mi = marginal - conditional
        return cls(
            marginal_entropy=marginal,
            mean_conditional_entropy=conditional,
            mutual_information=mi,
            marginal_entropy_bits=marginal / LN2,
            mean_conditional_entropy_bits=conditional / LN2,
            mutual_information_bits=mi / LN2,
        )

    def as_dict(self) -> dict:
        return {
            "marginal_entropy_nats": self.marginal_entropy,
            "mean_conditional_entropy_nats": self.mean_conditional_entropy,
            "mutual_information_nats": self.mutual_information,
            "marginal_entropy_bits": self.marginal_entropy_bits,
            "mean_conditional_entropy_bits": self.mean_conditional_entropy_bits,
            "mutual_information_bits": self.mutual_information_bits,
        }


def marginal_of(matrix: ProbMatrix) -> ClassDistribution:
    """Empirical marginal class distribution: the arithmetic mean of the rows."""
    return ClassDistribution(matrix.rows.mean(axis=0))


def kl_divergence(p: ClassDistribution, q: ClassDistribution) -> float:
    """KL(p || q) in nats, with 0 * ln(0/q) = 0 and q clamped to >= KL_EPS."""
    if p.k != q.k:
        raise InvalidInputError(f"length mismatch: p has {p.k} entries, q has {q.k}")
    qc = np.clip(q.probs, KL_EPS, None)
    return float(rel_entr(p.probs, qc).sum())


def entropy(p: ClassDistribution) -> float:
    """Shannon entropy -sum p ln p in nats, with 0 ln 0 = 0."""
    return float(-xlogy(p.probs, p.probs).sum())


def _rows_kl_to(rows: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Per-row KL(row || q) in nats, streamed in blocks."""
    qc = np.clip(q, KL_EPS, None)
    n = rows.shape[0]
    out = np.empty(n, dtype=np.float64)
    for lo in range(0, n, _BLOCK_ROWS):
        hi = min(lo + _BLOCK_ROWS, n)
        out[lo:hi] = rel_entr(rows[lo:hi], qc).sum(axis=1)
    return out


def _rows_entropy(rows: np.ndarray) -> np.ndarray:
    """Per-row Shannon entropy in nats, streamed in blocks."""
    n = rows.shape[0]
    out = np.empty(n, dtype=np.float64)
    for lo in range(0, n, _BLOCK_ROWS):
        hi = min(lo + _BLOCK_ROWS, n)
        out[lo:hi] = -xlogy(rows[lo:hi], rows[lo:hi]).sum(axis=1)
    return out


def inception_score(
    matrix: ProbMatrix,
    split: SplitSpec | None = None,
    seed: int | None = None,
) -> ScoreReport:
    """Split-protocol exponentiated score.

    Rows are partitioned into ``split.n_splits`` contiguous chunks in their
    given order (or after a seeded permutation when ``seed`` is provided).
    Each chunk is scored against its own marginal:
    exp( mean_i KL(row_i || chunk marginal) ). The report carries the
    per-chunk scores, their mean, and their population standard deviation.
    """
    if split is None:
        split = SplitSpec()
    rows = matrix.rows
    if seed is not None:
        perm = np.random.default_rng(seed).permutation(matrix.n)
        rows = rows[perm]
    bounds = split.chunk_bounds(matrix.n)
    scores = []
    for lo, hi in bounds:
        chunk = rows[lo:hi]
        q = chunk.mean(axis=0)
        scores.append(math.exp(float(_rows_kl_to(chunk, q).mean())))
    mean = float(np.mean(scores))
    std = 0.0 if len(scores) == 1 else float(np.std(scores))
    return ScoreReport(
        per_split_scores=tuple(scores),
        mean=mean,
        std=std,
        n_splits=split.n_splits,
        n=matrix.n,
        k=matrix.class_count,
    )


def improved_score(matrix: ProbMatrix) -> float:
    """Log-scale score: mean_i KL(row_i || global marginal), in nats.

    No exponentiation and a single marginal over the entire matrix, so the
    value is invariant to how the rows are batched and equals the plug-in
    mutual information between sample and class.
    """
    q = matrix.rows.mean(axis=0)
    return float(_rows_kl_to(matrix.rows, q).mean())


def entropy_decomposition(matrix: ProbMatrix) -> EntropyReport:
    """H(y), mean H(y|x), and their difference I(y;x), computed via entropies.

    This route never forms a KL term, which makes it an independent check of
    improved_score: the two agree to ~1e-9 on any valid matrix.
    """
    m = matrix.rows.mean(axis=0)
    marginal = float(-xlogy(m, m).sum())
    conditional = float(_rows_entropy(matrix.rows).mean())
    return EntropyReport.from_nats(marginal, conditional)


def bounds_check(report: ScoreReport) -> bool:
    """True iff every per-split score lies in [1, K] within 1e-9."""
    lo, hi = 1.0 - 1e-9, report.k + 1e-9
    return all(lo <= s <= hi for s in report.per_split_scores)
