"""Random forest of Gini trees with majority voting."""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed

from src.errors import ArgumentError
from src.models.base import check_features, derive_seed, validate_training
from src.models.tree import GINI, DecisionTree

logger = logging.getLogger(__name__)

DEFAULT_TREES = 100


@dataclass(eq=False)
class RandomForestModel:
    """Trees grown on bootstrap samples with sqrt(d) features per split."""

    trees: List[DecisionTree]
    n_classes: int
    n_features: int
    seed: int
    tree_seeds: List[int]
    max_features: int
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1

    @property
    def n_trees(self) -> int:
        return len(self.trees)


@dataclass(frozen=True)
class RfPrediction:
    """Winning class and the per-class vote counts behind it."""

    class_index: int
    votes: Tuple[int, ...]

    @property
    def vote_fraction(self) -> float:
        """Share of trees voting for the winning class."""
        return self.votes[self.class_index] / sum(self.votes)


def _grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    tree_seed: int,
    n_classes: int,
    max_features: int,
    max_depth: Optional[int],
    min_samples_leaf: int,
) -> DecisionTree:
    rng = np.random.default_rng(tree_seed)
    sample = rng.integers(0, X.shape[0], size=X.shape[0])
    tree = DecisionTree(
        criterion=GINI,
        max_depth=max_depth,
        min_samples_leaf=min_samples_leaf,
        max_features=max_features,
        n_classes=n_classes,
    )
    return tree.fit(X[sample], y[sample], rng)


def rf_fit(
    features: np.ndarray,
    labels: np.ndarray,
    n_trees: int = DEFAULT_TREES,
    seed: int = 7,
    max_depth: Optional[int] = None,
    min_samples_leaf: int = 1,
    n_classes: Optional[int] = None,
    n_jobs: int = 1,
) -> RandomForestModel:
    """Train a random forest.

    Tree ``i`` draws its bootstrap sample and split features from a seed
    derived from (seed, i), so the forest does not depend on ``n_jobs``.

    Args:
        features: N x d training matrix
        labels: Class index per row
        n_trees: Number of trees
        seed: 64-bit seed
        max_depth: Depth limit, None for unlimited
        min_samples_leaf: Minimum rows per leaf
        n_classes: K, defaults to max label + 1
        n_jobs: Worker threads

    Returns:
        RandomForestModel

    Raises:
        DegenerateModelError: If the labels hold a single class
    """
    X, y, k = validate_training(features, labels, n_classes)
    if n_trees < 1:
        raise ArgumentError("n_trees must be >= 1")

    max_features = max(1, int(math.sqrt(X.shape[1])))
    tree_seeds = [derive_seed(seed, i) for i in range(n_trees)]
    logger.info("Training random forest: %d trees on %d x %d", n_trees, X.shape[0], X.shape[1])
    trees = Parallel(n_jobs=n_jobs, backend="threading")(
        delayed(_grow_tree)(X, y, s, k, max_features, max_depth, min_samples_leaf) for s in tree_seeds
    )
    return RandomForestModel(
        trees=list(trees),
        n_classes=k,
        n_features=X.shape[1],
        seed=seed,
        tree_seeds=tree_seeds,
        max_features=max_features,
        max_depth=max_depth,
        min_samples_leaf=min_samples_leaf,
    )


def rf_tree_predictions(model: RandomForestModel, X: np.ndarray) -> np.ndarray:
    """n_trees x N matrix of individual tree votes."""
    X = check_features(X, model.n_features)
    return np.vstack([tree.predict(X) for tree in model.trees])


def rf_vote_counts(model: RandomForestModel, X: np.ndarray) -> np.ndarray:
    """N x K vote counts."""
    votes = rf_tree_predictions(model, X)
    counts = np.zeros((votes.shape[1], model.n_classes), dtype=np.int64)
    for tree_votes in votes:
        counts[np.arange(votes.shape[1]), tree_votes] += 1
    return counts


def rf_predict_proba(model: RandomForestModel, X: np.ndarray) -> np.ndarray:
    """Vote fractions per class."""
    return rf_vote_counts(model, X) / model.n_trees


def rf_predict(model: RandomForestModel, x: np.ndarray) -> RfPrediction:
    """Majority vote for one probe; ties go to the lowest class index.

    Raises:
        ArgumentError: If x does not have d entries
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ArgumentError("rf_predict takes a single d-vector")
    counts = rf_vote_counts(model, x)[0]
    return RfPrediction(int(np.argmax(counts)), tuple(int(c) for c in counts))
