"""Multiclass gradient boosting on the softmax cross-entropy."""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from joblib import Parallel, delayed
from scipy.special import logsumexp
from scipy.special import softmax as _softmax

from src.errors import ArgumentError
from src.models.base import check_features, validate_training
from src.models.tree import SQUARED_ERROR, DecisionTree

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class GradientBoostModel:
    """Per-class score functions F_k = F_k0 + eta * sum_m h_km.

    ``trees[k][m]`` is the regression tree of class k at stage m.
    """

    initial_scores: np.ndarray
    trees: List[List[DecisionTree]]
    learning_rate: float
    n_features: int
    tree_depth: int = 3
    seed: int = 7
    loss_history: List[float] = field(default_factory=list)

    def __post_init__(self):
        self.initial_scores = np.asarray(self.initial_scores, dtype=np.float64).reshape(-1)
        if len(self.trees) != self.initial_scores.shape[0]:
            raise ArgumentError("Need one tree sequence per class")
        if len({len(seq) for seq in self.trees}) > 1:
            raise ArgumentError("Every class must have the same number of stages")

    @property
    def n_classes(self) -> int:
        return int(self.initial_scores.shape[0])

    @property
    def n_stages(self) -> int:
        return len(self.trees[0]) if self.trees else 0


def softmax(scores: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction."""
    return _softmax(np.asarray(scores, dtype=np.float64), axis=-1)


def cross_entropy(scores: np.ndarray, labels: np.ndarray) -> float:
    """Mean negative log-likelihood of the true classes."""
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    return float(np.mean(logsumexp(scores, axis=1) - scores[np.arange(y.shape[0]), y]))


def _fit_residual_tree(X: np.ndarray, residuals: np.ndarray, depth: int) -> DecisionTree:
    return DecisionTree(criterion=SQUARED_ERROR, max_depth=depth).fit(X, residuals)


def gb_fit(
    features: np.ndarray,
    labels: np.ndarray,
    n_stages: int = 100,
    learning_rate: float = 0.1,
    tree_depth: int = 3,
    seed: int = 7,
    n_classes: Optional[int] = None,
    n_jobs: int = 1,
) -> GradientBoostModel:
    """Fit one regression tree per class and stage to the residuals 1{y=k} - P_k.

    Scores start at zero. Trees split on squared error and their leaves hold
    plain residual means. Trees consider every feature in order, so the fit is
    deterministic; ``seed`` is recorded with the model.

    Args:
        features: N x d training matrix
        labels: Class index per row
        n_stages: Number of boosting stages M
        learning_rate: Shrinkage eta (0 keeps the uniform prior)
        tree_depth: Depth limit of every regression tree
        seed: 64-bit seed
        n_classes: K, defaults to max label + 1
        n_jobs: Worker threads for the per-class trees of one stage

    Returns:
        GradientBoostModel with the per-stage training cross-entropy in ``loss_history``

    Raises:
        ArgumentError: If eta < 0 or M < 1
    """
    if learning_rate < 0 or n_stages < 1:
        raise ArgumentError(f"Need learning_rate >= 0 and n_stages >= 1, got {learning_rate}, {n_stages}")
    if tree_depth < 1:
        raise ArgumentError("tree_depth must be >= 1")
    X, y, k = validate_training(features, labels, n_classes)
    if learning_rate == 0:
        logger.warning("learning_rate is 0; the model will predict the uniform prior")

    one_hot = np.eye(k)[y]
    scores = np.zeros((X.shape[0], k))
    trees: List[List[DecisionTree]] = [[] for _ in range(k)]
    history = [cross_entropy(scores, y)]

    logger.info("Training gradient boosting: K=%d, M=%d, eta=%g on %d x %d", k, n_stages, learning_rate, *X.shape)
    with Parallel(n_jobs=n_jobs, backend="threading") as parallel:
        for m in range(n_stages):
            residuals = one_hot - softmax(scores)
            stage = parallel(delayed(_fit_residual_tree)(X, residuals[:, c], tree_depth) for c in range(k))
            for c, tree in enumerate(stage):
                trees[c].append(tree)
                scores[:, c] += learning_rate * tree.predict(X)
            history.append(cross_entropy(scores, y))
            logger.debug("stage %d: training cross-entropy %.6f", m + 1, history[-1])

    return GradientBoostModel(
        initial_scores=np.zeros(k),
        trees=trees,
        learning_rate=learning_rate,
        n_features=X.shape[1],
        tree_depth=tree_depth,
        seed=seed,
        loss_history=history,
    )


def gb_decision_scores(model: GradientBoostModel, X: np.ndarray) -> np.ndarray:
    """N x K matrix of final scores F_k."""
    X = check_features(X, model.n_features)
    scores = np.tile(model.initial_scores, (X.shape[0], 1))
    for c, sequence in enumerate(model.trees):
        for tree in sequence:
            scores[:, c] += model.learning_rate * tree.predict(X)
    return scores


def gb_predict_proba(model: GradientBoostModel, x: np.ndarray) -> np.ndarray:
    """Class probabilities: a K-vector for one probe, N x K for a matrix."""
    probabilities = softmax(gb_decision_scores(model, x))
    return probabilities[0] if np.ndim(x) == 1 else probabilities


def gb_predict(model: GradientBoostModel, x: np.ndarray) -> int:
    """Arg-max score of one probe; ties go to the lowest class index."""
    if np.ndim(x) != 1:
        raise ArgumentError("gb_predict takes a single d-vector")
    return int(np.argmax(gb_decision_scores(model, x)[0]))
