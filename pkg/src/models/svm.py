"""One-vs-rest linear SVM trained by stochastic subgradient descent."""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.core import check_seed
from src.errors import ArgumentError
from src.models.base import check_features, validate_training

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class LinearSvmModel:
    """Per-class hyperplanes f_k(x) = w_k . z(x) + b_k on z-scored features."""

    weights: np.ndarray
    biases: np.ndarray
    mean: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64).reshape(-1)
        self.mean = np.asarray(self.mean, dtype=np.float64).reshape(-1)
        self.scale = np.asarray(self.scale, dtype=np.float64).reshape(-1)
        if self.weights.ndim != 2 or self.weights.shape[0] != self.biases.shape[0]:
            raise ArgumentError("Need one weight vector and one bias per class")
        if self.mean.shape[0] != self.weights.shape[1] or self.scale.shape != self.mean.shape:
            raise ArgumentError("Standardization parameters must match the weight dimension")

    @property
    def n_classes(self) -> int:
        return int(self.weights.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.weights.shape[1])


@dataclass(frozen=True)
class SvmPrediction:
    """Chosen class and the decision value of every class."""

    class_index: int
    decision_values: Tuple[float, ...]


def svm_fit(
    features: np.ndarray,
    labels: np.ndarray,
    C: float = 1.0,
    epochs: int = 200,
    seed: int = 7,
    n_classes: Optional[int] = None,
    batch_size: int = 32,
    learning_rate: float = 0.1,
) -> LinearSvmModel:
    """Train K one-vs-rest hinge-loss classifiers.

    Each classifier minimises lambda/2 ||w||^2 + mean hinge loss with
    lambda = 1 / (C N); class k is relabelled +1 and every other class -1.
    All K classifiers see the same seeded mini-batch order. Zero-variance
    columns are scaled by 1.

    Args:
        features: N x d training matrix
        labels: Class index per row
        C: Regularization strength (larger means weaker regularization)
        epochs: Passes over the data
        seed: 64-bit seed for the batch order
        n_classes: K, defaults to max label + 1
        batch_size: Rows per subgradient step
        learning_rate: Initial step size

    Returns:
        LinearSvmModel
    """
    X, y, k = validate_training(features, labels, n_classes)
    if C <= 0 or epochs < 1 or batch_size < 1 or learning_rate <= 0:
        raise ArgumentError("C, epochs, batch_size and learning_rate must be positive")
    rng = np.random.default_rng(check_seed(seed))

    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    Z = (X - mean) / scale

    n, d = Z.shape
    targets = np.where(y[:, None] == np.arange(k)[None, :], 1.0, -1.0)
    lam = 1.0 / (C * n)
    W = np.zeros((d, k))
    b = np.zeros(k)

    logger.info("Training OvR linear SVM: K=%d on %d x %d, %d epochs", k, n, d, epochs)
    step = 0
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            batch = order[start : start + batch_size]
            Zb, Yb = Z[batch], targets[batch]
            violated = (Yb * (Zb @ W + b) < 1.0) * Yb
            eta = learning_rate / (1.0 + learning_rate * lam * step)
            W -= eta * (lam * W - Zb.T @ violated / batch.shape[0])
            b += eta * violated.sum(axis=0) / batch.shape[0]
            step += 1

    return LinearSvmModel(weights=W.T.copy(), biases=b, mean=mean, scale=scale)


def svm_decision_values(model: LinearSvmModel, X: np.ndarray) -> np.ndarray:
    """N x K matrix of f_k values."""
    X = check_features(X, model.n_features)
    return ((X - model.mean) / model.scale) @ model.weights.T + model.biases


def svm_predict(model: LinearSvmModel, x: np.ndarray) -> SvmPrediction:
    """Arg-max class of one probe; ties go to the lowest class index.

    Raises:
        ArgumentError: If x does not have d entries
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ArgumentError("svm_predict takes a single d-vector")
    values = svm_decision_values(model, x)[0]
    return SvmPrediction(int(np.argmax(values)), tuple(float(v) for v in values))
