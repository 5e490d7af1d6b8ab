"""CART decision trees: Gini classification and squared-error regression."""

from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from src.errors import ArgumentError, ConfigurationError

GINI = "gini"
SQUARED_ERROR = "squared_error"


@dataclass
class TreeNode:
    """Internal split (feature, threshold, children) or leaf (value)."""

    feature: int = -1
    threshold: float = 0.0
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None
    value: Optional[float] = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def to_dict(self) -> Dict:
        """Nested dictionary form."""
        if self.is_leaf:
            return {"value": self.value}
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "TreeNode":
        """Create from the nested dictionary form."""
        if "value" in data:
            return cls(value=data["value"])
        try:
            return cls(
                feature=int(data["feature"]),
                threshold=float(data["threshold"]),
                left=cls.from_dict(data["left"]),
                right=cls.from_dict(data["right"]),
            )
        except KeyError as e:
            raise ConfigurationError(f"Tree node is missing {e.args[0]!r}")


def _gini_scores(y_sorted: np.ndarray, n_classes: int) -> np.ndarray:
    """Weighted child impurity for a split after each sorted position."""
    n = y_sorted.shape[0]
    left = np.cumsum(np.eye(n_classes)[y_sorted], axis=0)[:-1]
    right = left[-1] + np.eye(n_classes)[y_sorted[-1]] - left
    n_left = np.arange(1, n, dtype=np.float64)
    n_right = n - n_left
    gini_left = 1.0 - np.sum((left / n_left[:, None]) ** 2, axis=1)
    gini_right = 1.0 - np.sum((right / n_right[:, None]) ** 2, axis=1)
    return (n_left * gini_left + n_right * gini_right) / n


def _sse_scores(y_sorted: np.ndarray) -> np.ndarray:
    """Summed child squared error for a split after each sorted position."""
    n = y_sorted.shape[0]
    csum = np.cumsum(y_sorted)
    csq = np.cumsum(y_sorted**2)
    n_left = np.arange(1, n, dtype=np.float64)
    n_right = n - n_left
    sum_left, sq_left = csum[:-1], csq[:-1]
    sum_right, sq_right = csum[-1] - sum_left, csq[-1] - sq_left
    return (sq_left - sum_left**2 / n_left) + (sq_right - sum_right**2 / n_right)


class DecisionTree:
    """Binary tree grown greedily on axis-aligned thresholds (x[f] <= t goes left)."""

    def __init__(
        self,
        criterion: str = GINI,
        max_depth: Optional[int] = None,
        min_samples_leaf: int = 1,
        max_features: Optional[int] = None,
        n_classes: Optional[int] = None,
    ):
        """Initialize an unfitted tree.

        Args:
            criterion: "gini" (classification leaves) or "squared_error" (real-valued leaves)
            max_depth: Maximum leaf depth, None for unlimited
            min_samples_leaf: Minimum rows per leaf
            max_features: Features drawn per split, None for all
            n_classes: Number of classes for Gini trees
        """
        if criterion not in (GINI, SQUARED_ERROR):
            raise ArgumentError(f"Unknown split criterion: {criterion!r}")
        if max_depth is not None and max_depth < 0:
            raise ArgumentError("max_depth must be >= 0")
        if min_samples_leaf < 1:
            raise ArgumentError("min_samples_leaf must be >= 1")
        self.criterion = criterion
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.n_classes = n_classes
        self.n_features: Optional[int] = None
        self.root: Optional[TreeNode] = None

    def _leaf_value(self, y: np.ndarray) -> float:
        if self.criterion == GINI:
            return int(np.argmax(np.bincount(y, minlength=self.n_classes)))
        return float(np.mean(y))

    def _is_pure(self, y: np.ndarray) -> bool:
        return bool(np.all(y == y[0]))

    def _best_split(
        self, X: np.ndarray, y: np.ndarray, rng: Optional[np.random.Generator]
    ) -> Optional[Tuple[int, float]]:
        n, d = X.shape
        features = np.arange(d) if rng is None else rng.permutation(d)
        budget = d if self.max_features is None else self.max_features
        min_leaf = self.min_samples_leaf
        positions = np.arange(1, n)
        allowed = (positions >= min_leaf) & (n - positions >= min_leaf)

        best: Optional[Tuple[float, int, float]] = None
        for tried, f in enumerate(features):
            if tried >= budget and best is not None:
                break
            order = np.argsort(X[:, f], kind="stable")
            xs = X[order, f]
            ys = y[order]
            valid = allowed & (xs[:-1] < xs[1:])
            if not np.any(valid):
                continue
            scores = _gini_scores(ys, self.n_classes) if self.criterion == GINI else _sse_scores(ys)
            scores = np.where(valid, scores, np.inf)
            i = int(np.argmin(scores))
            if best is None or scores[i] < best[0]:
                threshold = 0.5 * (xs[i] + xs[i + 1])
                if threshold >= xs[i + 1]:
                    threshold = float(xs[i])
                best = (float(scores[i]), int(f), float(threshold))

        if best is None:
            return None
        return best[1], best[2]

    def fit(
        self, X: np.ndarray, y: np.ndarray, rng: Optional[np.random.Generator] = None
    ) -> "DecisionTree":
        """Grow the tree.

        Args:
            X: N x d feature matrix
            y: Class indices (gini) or real targets (squared_error)
            rng: Source of per-split feature draws; None considers features in order

        Returns:
            self
        """
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64 if self.criterion == GINI else np.float64)
        if X.ndim != 2 or X.shape[0] == 0 or X.shape[0] != y.shape[0]:
            raise ArgumentError("Tree needs a non-empty N x d matrix with N targets")
        if self.criterion == GINI and self.n_classes is None:
            self.n_classes = int(y.max()) + 1
        self.n_features = X.shape[1]

        self.root = TreeNode()
        stack: List[Tuple[TreeNode, np.ndarray, int]] = [(self.root, np.arange(X.shape[0]), 0)]
        while stack:
            node, idx, depth = stack.pop()
            y_node = y[idx]
            split = None
            can_grow = self.max_depth is None or depth < self.max_depth
            if can_grow and idx.shape[0] >= 2 * self.min_samples_leaf and not self._is_pure(y_node):
                split = self._best_split(X[idx], y_node, rng)
            if split is None:
                node.value = self._leaf_value(y_node)
                continue
            node.feature, node.threshold = split
            goes_left = X[idx, node.feature] <= node.threshold
            node.left, node.right = TreeNode(), TreeNode()
            stack.append((node.right, idx[~goes_left], depth + 1))
            stack.append((node.left, idx[goes_left], depth + 1))
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Leaf value for every row of X."""
        if self.root is None:
            raise ArgumentError("Tree is not fitted")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ArgumentError(f"Expected rows of {self.n_features} features, got shape {X.shape}")
        out = np.empty(X.shape[0], dtype=np.int64 if self.criterion == GINI else np.float64)
        stack = [(self.root, np.arange(X.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if idx.shape[0] == 0:
                continue
            if node.is_leaf:
                out[idx] = node.value
                continue
            goes_left = X[idx, node.feature] <= node.threshold
            stack.append((node.left, idx[goes_left]))
            stack.append((node.right, idx[~goes_left]))
        return out

    def nodes(self) -> Iterator[Tuple[TreeNode, int]]:
        """Yield (node, depth) pairs, root first."""
        stack = [] if self.root is None else [(self.root, 0)]
        while stack:
            node, depth = stack.pop()
            yield node, depth
            if not node.is_leaf:
                stack.append((node.right, depth + 1))
                stack.append((node.left, depth + 1))

    def depth(self) -> int:
        """Depth of the deepest leaf."""
        return max((depth for node, depth in self.nodes() if node.is_leaf), default=0)

    def to_dict(self) -> Dict:
        """Convert to dictionary."""
        return {
            "criterion": self.criterion,
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "max_features": self.max_features,
            "n_classes": self.n_classes,
            "n_features": self.n_features,
            "root": None if self.root is None else self.root.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "DecisionTree":
        """Create from dictionary."""
        tree = cls(
            criterion=data["criterion"],
            max_depth=data.get("max_depth"),
            min_samples_leaf=data.get("min_samples_leaf", 1),
            max_features=data.get("max_features"),
            n_classes=data.get("n_classes"),
        )
        tree.n_features = data.get("n_features")
        if data.get("root") is not None:
            tree.root = TreeNode.from_dict(data["root"])
        return tree
