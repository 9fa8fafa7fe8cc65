"""Small self-contained differentiable classifiers with exact input-gradients.

Two architectures: a softmax-linear model and a one-hidden-layer MLP
(rectifier or tanh activation). Both expose class probabilities and the
closed-form gradient of any class probability with respect to the input,
which is all the gradient-sign attack needs. Training is plain minibatch
SGD on cross-entropy over synthetic Gaussian-blob data; no ML framework
is involved, so everything is deterministic given a seed.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, TrainingError

ACTIVATIONS = ("relu", "tanh")


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction for stability."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass
class SoftmaxLinear:
    """softmax(W x + b) with W of shape (K, d)."""

    weights: np.ndarray
    biases: np.ndarray

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64)
        if self.weights.ndim != 2 or self.biases.shape != (self.weights.shape[0],):
            raise InvalidInputError(
                f"bad parameter shapes: W {self.weights.shape}, b {self.biases.shape}"
            )
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.biases))):
            raise InvalidInputError("parameters contain non-finite entries")

    @property
    def input_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def class_count(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def zeros(cls, input_dim: int, class_count: int) -> "SoftmaxLinear":
        return cls(np.zeros((class_count, input_dim)), np.zeros(class_count))

    @classmethod
    def random(cls, input_dim: int, class_count: int, seed: int, scale: float = 0.1) -> "SoftmaxLinear":
        rng = np.random.default_rng(seed)
        return cls(
            rng.normal(0.0, scale, (class_count, input_dim)),
            rng.normal(0.0, scale, class_count),
        )

    def logits(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weights.T + self.biases

    def _prob_input_gradient(self, x: np.ndarray, j: int) -> np.ndarray:
        p = softmax(self.logits(x))
        # d p_j / d x = p_j (w_j - sum_k p_k w_k)
        return p[j] * (self.weights[j] - p @ self.weights)


@dataclass
class MLPClassifier:
    """One hidden layer: softmax(W2 act(W1 x + b1) + b2)."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    activation: str = "relu"

    def __post_init__(self) -> None:
        self.w1 = np.asarray(self.w1, dtype=np.float64)
        self.b1 = np.asarray(self.b1, dtype=np.float64)
        self.w2 = np.asarray(self.w2, dtype=np.float64)
        self.b2 = np.asarray(self.b2, dtype=np.float64)
        h, d = self.w1.shape
        k = self.w2.shape[0]
        if h < 1:
            raise InvalidInputError("hidden width must be >= 1")
        if self.b1.shape != (h,) or self.w2.shape != (k, h) or self.b2.shape != (k,):
            raise InvalidInputError("inconsistent layer shapes")
        if self.activation not in ACTIVATIONS:
            raise InvalidInputError(f"unknown activation {self.activation!r}")
        for a in (self.w1, self.b1, self.w2, self.b2):
            if not np.all(np.isfinite(a)):
                raise InvalidInputError("parameters contain non-finite entries")

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def class_count(self) -> int:
        return self.w2.shape[0]

    @classmethod
    def random(
        cls,
        input_dim: int,
        hidden_dim: int,
        class_count: int,
        seed: int,
        activation: str = "relu",
    ) -> "MLPClassifier":
        rng = np.random.default_rng(seed)
        # He-style scaling keeps early training stable for both activations.
        s1 = np.sqrt(2.0 / input_dim)
        s2 = np.sqrt(2.0 / hidden_dim)
        return cls(
            rng.normal(0.0, s1, (hidden_dim, input_dim)),
            np.zeros(hidden_dim),
            rng.normal(0.0, s2, (class_count, hidden_dim)),
            np.zeros(class_count),
            activation=activation,
        )

    def _act(self, z: np.ndarray) -> np.ndarray:
        if self.activation == "relu":
            return np.maximum(z, 0.0)
        return np.tanh(z)

    def _act_grad(self, z: np.ndarray) -> np.ndarray:
        if self.activation == "relu":
            # subgradient at exactly 0 is taken as 0
            return (z > 0).astype(np.float64)
        t = np.tanh(z)
        return 1.0 - t * t

    def logits(self, x: np.ndarray) -> np.ndarray:
        return self._act(x @ self.w1.T + self.b1) @ self.w2.T + self.b2

    def _prob_input_gradient(self, x: np.ndarray, j: int) -> np.ndarray:
        z1 = self.w1 @ x + self.b1
        h = self._act(z1)
        p = softmax(self.w2 @ h + self.b2)
        g_logits = -p[j] * p
        g_logits[j] += p[j]
        g_hidden = self.w2.T @ g_logits
        return self.w1.T @ (g_hidden * self._act_grad(z1))


Classifier = SoftmaxLinear | MLPClassifier


def _check_input(model: Classifier, x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape != (model.input_dim,):
        raise InvalidInputError(
            f"expected input of shape ({model.input_dim},), got {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("input contains non-finite values")
    return arr


def predict_proba(model: Classifier, x) -> np.ndarray:
    """Class probabilities for a single d-vector."""
    return softmax(model.logits(_check_input(model, x)))


def predict_proba_batch(model: Classifier, xs: np.ndarray) -> np.ndarray:
    """Class probabilities for an (N, d) batch of inputs."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != model.input_dim:
        raise InvalidInputError(
            f"expected inputs of shape (n, {model.input_dim}), got {xs.shape}"
        )
    return softmax(model.logits(xs))


def grad_class_prob(model: Classifier, x, j: int) -> np.ndarray:
    """Exact gradient of p(y=j|x) with respect to x."""
    arr = _check_input(model, x)
    if not 0 <= j < model.class_count:
        raise InvalidInputError(
            f"class index {j} out of range for K={model.class_count}"
        )
    return model._prob_input_gradient(arr, j)


@dataclass(frozen=True, eq=False)
class SyntheticDataset:
    """Labelled points drawn from per-class Gaussian blobs."""

    points: np.ndarray
    labels: np.ndarray
    description: str = "synthetic"

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        labs = np.asarray(self.labels, dtype=np.int64)
        if pts.ndim != 2 or labs.shape != (pts.shape[0],):
            raise InvalidInputError("points must be (N, d) with one label per row")
        if labs.size == 0:
            raise InvalidInputError("dataset is empty")
        k = int(labs.max()) + 1
        present = np.unique(labs)
        if len(present) != k or present[0] != 0:
            raise InvalidInputError("every class in [0, K) must be represented")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labs)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def class_count(self) -> int:
        return int(self.labels.max()) + 1

    def split(self, train_fraction: float, seed: int) -> tuple["SyntheticDataset", "SyntheticDataset"]:
        """Seeded shuffle-split; both halves keep every class represented."""
        if not 0.0 < train_fraction < 1.0:
            raise InvalidInputError("train_fraction must lie in (0, 1)")
        rng = np.random.default_rng(seed)
        k = self.class_count
        train_idx: list[np.ndarray] = []
        test_idx: list[np.ndarray] = []
        # stratified so small splits cannot drop a class
        for c in range(k):
            idx = np.flatnonzero(self.labels == c)
            if len(idx) < 2:
                raise InvalidInputError(
                    f"class {c} has fewer than 2 points; cannot split"
                )
            idx = idx[rng.permutation(len(idx))]
            cut = min(max(1, int(round(train_fraction * len(idx)))), len(idx) - 1)
            train_idx.append(idx[:cut])
            test_idx.append(idx[cut:])
        # keep source row order so class interleaving survives the split
        tr = np.sort(np.concatenate(train_idx))
        te = np.sort(np.concatenate(test_idx))
        return (
            SyntheticDataset(self.points[tr], self.labels[tr], self.description + "/train"),
            SyntheticDataset(self.points[te], self.labels[te], self.description + "/test"),
        )


def gaussian_blobs(
    n_classes: int = 10,
    dim: int = 16,
    n_per_class: int = 500,
    center_scale: float = 2.5,
    spread: float = 0.4,
    seed: int = 0,
) -> SyntheticDataset:
    """Well-separated per-class Gaussian blobs, interleaved by class."""
    if n_classes < 2 or n_per_class < 1 or dim < 1:
        raise InvalidInputError("need n_classes >= 2, dim >= 1, n_per_class >= 1")
    rng = np.random.default_rng(seed)
    centers = rng.normal(0.0, center_scale, (n_classes, dim))
    labels = np.tile(np.arange(n_classes), n_per_class)
    points = centers[labels] + rng.normal(0.0, spread, (labels.size, dim))
    desc = f"blobs(k={n_classes}, d={dim}, n={labels.size}, seed={seed})"
    return SyntheticDataset(points, labels, desc)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 30
    batch_size: int = 64
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate <= 0 or self.epochs < 0 or self.batch_size < 1:
            raise InvalidInputError(f"bad training config: {self}")


def _one_hot(labels: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros((labels.size, k), dtype=np.float64)
    out[np.arange(labels.size), labels] = 1.0
    return out


def cross_entropy(model: Classifier, xs: np.ndarray, labels: np.ndarray) -> float:
    """Mean negative log-likelihood of the true labels."""
    p = predict_proba_batch(model, xs)
    picked = np.clip(p[np.arange(labels.size), labels], 1e-300, None)
    return float(-np.log(picked).mean())


def accuracy(model: Classifier, xs: np.ndarray, labels: np.ndarray) -> float:
    p = predict_proba_batch(model, xs)
    return float((p.argmax(axis=1) == labels).mean())


def _sgd_step(model: Classifier, xb: np.ndarray, yb: np.ndarray, lr: float) -> None:
    b = xb.shape[0]
    if isinstance(model, SoftmaxLinear):
        p = softmax(model.logits(xb))
        d_logits = (p - yb) / b
        model.weights -= lr * (d_logits.T @ xb)
        model.biases -= lr * d_logits.sum(axis=0)
        return
    z1 = xb @ model.w1.T + model.b1
    h = model._act(z1)
    p = softmax(h @ model.w2.T + model.b2)
    d_logits = (p - yb) / b
    d_h = d_logits @ model.w2
    d_z1 = d_h * model._act_grad(z1)
    model.w2 -= lr * (d_logits.T @ h)
    model.b2 -= lr * d_logits.sum(axis=0)
    model.w1 -= lr * (d_z1.T @ xb)
    model.b1 -= lr * d_z1.sum(axis=0)


def train(
    model: Classifier, data: SyntheticDataset, config: TrainConfig
) -> tuple[Classifier, list[float]]:
    """Minibatch SGD on cross-entropy; returns a new model and the loss trace.

    The input model is left untouched. The trace starts with the pre-training
    loss, then one entry per epoch; zero epochs therefore returns an
    unchanged copy with a single-entry trace.
    """
    if model.input_dim != data.dim:
        raise InvalidInputError(
            f"model expects d={model.input_dim}, data has d={data.dim}"
        )
    if model.class_count < data.class_count:
        raise InvalidInputError(
            f"model has K={model.class_count}, data has {data.class_count} classes"
        )
    trained = copy.deepcopy(model)
    rng = np.random.default_rng(config.seed)
    y = _one_hot(data.labels, trained.class_count)
    losses = [cross_entropy(trained, data.points, data.labels)]
    for _ in range(config.epochs):
        order = rng.permutation(data.n)
        for lo in range(0, data.n, config.batch_size):
            idx = order[lo : lo + config.batch_size]
            _sgd_step(trained, data.points[idx], y[idx], config.learning_rate)
        loss = cross_entropy(trained, data.points, data.labels)
        if not np.isfinite(loss):
            raise TrainingError(f"loss diverged to {loss} during training")
        losses.append(loss)
    return trained, losses
