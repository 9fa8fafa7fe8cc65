"""Gradient-sign attack that games the exponentiated score.

Each emitted sample starts from an initial distribution and is pushed by
repeated sign-gradient steps, x <- x + eps * sgn(grad_x p(y=j|x)), toward a
one-hot prediction for its target class; targets cycle j -> (j+1) mod K
across samples, so the attacked batch has a near-uniform marginal and
near-zero conditional entropy -- the score approaches its maximum K even
though nothing about the samples resembles the training data.

Setting the iteration budget (or step size) to zero degenerates into the
replay attack: the "generator" just emits its initial samples, which for an
empirical init means memorized data verbatim.

Convergence is declared when p(y=j|x) >= 1 - delta; the per-sample trace
records the target-class probability after every applied step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .classifiers import Classifier, grad_class_prob, predict_proba, predict_proba_batch
from .errors import AttackError, InvalidInputError
from .metrics import ProbMatrix


@dataclass(frozen=True)
class UniformBoxInit:
    """Coordinates drawn independently from U(lo, hi) in d dimensions."""

    lo: float
    hi: float
    dim: int

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise InvalidInputError(f"need lo < hi, got [{self.lo}, {self.hi}]")
        if self.dim < 1:
            raise InvalidInputError(f"dim must be positive, got {self.dim}")

    def describe(self) -> str:
        return f"uniform_box({self.lo:g}, {self.hi:g}, d={self.dim})"


@dataclass(frozen=True, eq=False)
class EmpiricalInit:
    """Cycles through a fixed point set in storage order.

    Sample i starts at points[i mod n], so a zero-iteration attack over
    n samples reproduces the point set exactly (the replay attack).
    """

    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise InvalidInputError("empirical init needs a non-empty (N, d) array")
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def describe(self) -> str:
        return f"empirical({self.points.shape[0]} points)"


@dataclass(frozen=True, eq=False)
class FixedInit:
    """Every sample starts from the same point."""

    point: np.ndarray

    def __post_init__(self) -> None:
        pt = np.asarray(self.point, dtype=np.float64)
        if pt.ndim != 1:
            raise InvalidInputError("fixed init needs a 1-D point")
        object.__setattr__(self, "point", pt)

    @property
    def dim(self) -> int:
        return self.point.shape[0]

    def describe(self) -> str:
        return f"fixed(d={self.dim})"


InitSpec = Union[UniformBoxInit, EmpiricalInit, FixedInit]


@dataclass(frozen=True)
class AttackConfig:
    """Step size, iteration budget, stop threshold, and initial distribution."""

    epsilon: float
    max_iters: int
    init: InitSpec
    early_stop_delta: float = 1e-3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epsilon < 0:
            raise InvalidInputError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.max_iters < 0:
            raise InvalidInputError(f"max_iters must be >= 0, got {self.max_iters}")
        if not 0.0 < self.early_stop_delta < 1.0:
            raise InvalidInputError(
                f"early_stop_delta must lie in (0, 1), got {self.early_stop_delta}"
            )


class AttackState:
    """Target-class cycler: j advances by (j + 1) mod K per emitted sample."""

    def __init__(self, class_count: int, start: int = 0):
        if class_count < 2:
            raise InvalidInputError("need at least two classes")
        if not 0 <= start < class_count:
            raise InvalidInputError(f"start class {start} out of range")
        self.class_count = class_count
        self.current = start
        self.emitted = 0

    def next_target(self) -> int:
        j = self.current
        self.current = (self.current + 1) % self.class_count
        self.emitted += 1
        return j


@dataclass(frozen=True)
class AttackTrace:
    """Target-class probability after each applied step."""

    target: int
    probs: tuple[float, ...]
    iterations: int
    converged: bool


@dataclass(frozen=True, eq=False)
class AttackResult:
    """Attacked batch: classifier outputs, raw samples, per-sample traces."""

    matrix: ProbMatrix
    samples: np.ndarray
    traces: tuple[AttackTrace, ...]
    targets: tuple[int, ...]

    @property
    def converged_fraction(self) -> float:
        if not self.traces:
            return 0.0
        return sum(t.converged for t in self.traces) / len(self.traces)


def fgsm_step(x: np.ndarray, j: int, model: Classifier, epsilon: float) -> np.ndarray:
    """One sign-gradient ascent step on p(y=j|x); sgn(0) leaves a coordinate be."""
    g = grad_class_prob(model, x, j)
    if not np.all(np.isfinite(g)):
        raise AttackError(f"non-finite gradient for class {j}")
    return x + epsilon * np.sign(g)


def _draw_init(init: InitSpec, index: int, rng: np.random.Generator | None) -> np.ndarray:
    if isinstance(init, UniformBoxInit):
        if rng is None:
            raise InvalidInputError("uniform_box init requires a seeded generator")
        return rng.uniform(init.lo, init.hi, init.dim)
    if isinstance(init, EmpiricalInit):
        return init.points[index % init.points.shape[0]].copy()
    return init.point.copy()


def optimize_sample(
    model: Classifier,
    j: int,
    config: AttackConfig,
    rng: np.random.Generator | None = None,
    x0: np.ndarray | None = None,
) -> tuple[np.ndarray, AttackTrace]:
    """Push one sample toward p(y=j|x) = 1.

    Starts from ``x0`` if given, otherwise draws from ``config.init`` (using
    ``rng``, or a generator seeded from ``config.seed``). Steps until the
    target probability reaches 1 - delta or the budget runs out.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    x = np.asarray(x0, dtype=np.float64).copy() if x0 is not None else _draw_init(config.init, 0, rng)
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("initial sample is non-finite")
    threshold = 1.0 - config.early_stop_delta
    p = float(predict_proba(model, x)[j])
    probs: list[float] = []
    iters = 0
    while iters < config.max_iters and p < threshold:
        x = fgsm_step(x, j, model, config.epsilon)
        p = float(predict_proba(model, x)[j])
        probs.append(p)
        iters += 1
    trace = AttackTrace(target=j, probs=tuple(probs), iterations=iters, converged=p >= threshold)
    return x, trace


def generate_attacked_batch(
    model: Classifier, config: AttackConfig, n_samples: int
) -> AttackResult:
    """Emit ``n_samples`` optimized samples with the target class cycling.

    Sample i targets class i mod K, assigned up front, and draws its own
    generator from an independent child seed, so results do not depend on
    evaluation order.
    """
    if n_samples < 1:
        raise InvalidInputError(f"n_samples must be positive, got {n_samples}")
    k = model.class_count
    state = AttackState(k)
    targets = tuple(state.next_target() for _ in range(n_samples))
    children = np.random.SeedSequence(config.seed).spawn(n_samples)
    samples = np.empty((n_samples, model.input_dim), dtype=np.float64)
    traces: list[AttackTrace] = []
    for i, j in enumerate(targets):
        rng = np.random.default_rng(children[i])
        x0 = _draw_init(config.init, i, rng)
        x, trace = optimize_sample(model, j, config, x0=x0)
        samples[i] = x
        traces.append(trace)
    matrix = ProbMatrix(predict_proba_batch(model, samples), validate=False)
    return AttackResult(matrix=matrix, samples=samples, traces=tuple(traces), targets=targets)


def replay_generator(model: Classifier, data: np.ndarray) -> ProbMatrix:
    """Score matrix of memorized samples emitted verbatim.

    The memorization baseline: its score upper-bounds what an honest
    generator of the same distribution can achieve, and it never exceeds
    ln K on the log scale.
    """
    pts = np.asarray(data, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise InvalidInputError("replay needs a non-empty (N, d) sample set")
    return ProbMatrix(predict_proba_batch(model, pts), validate=False)


def sample_norm_bound(config: AttackConfig) -> float:
    """Upper bound on the L2 norm of any emitted sample.

    Triangle inequality: the init's worst-case norm plus eps * max_iters
    steps of length at most eps * sqrt(d) each.
    """
    init = config.init
    if isinstance(init, UniformBoxInit):
        base = math.sqrt(init.dim) * max(abs(init.lo), abs(init.hi))
    elif isinstance(init, EmpiricalInit):
        base = float(np.linalg.norm(init.points, axis=1).max())
    else:
        base = float(np.linalg.norm(init.point))
    return base + config.epsilon * config.max_iters * math.sqrt(init.dim)
