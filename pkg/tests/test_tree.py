"""Unit tests for CART decision trees."""

import numpy as np
import pytest

from src.errors import ArgumentError
from src.models.tree import GINI, SQUARED_ERROR, DecisionTree, TreeNode


@pytest.fixture
def two_blobs():
    """Two classes separated on the first feature."""
    rng = np.random.default_rng(0)
    X = np.vstack([rng.normal(0, 1, (50, 3)), rng.normal(0, 1, (50, 3)) + [8, 0, 0]])
    y = np.repeat([0, 1], 50)
    return X, y


class TestClassificationTree:
    """Test Gini trees."""

    def test_single_split_on_obvious_threshold(self):
        """Test pure single-feature data is split at depth 1."""
        X = np.arange(10, dtype=float).reshape(-1, 1)
        y = np.array([0] * 5 + [1] * 5)
        tree = DecisionTree().fit(X, y)
        assert tree.depth() == 1
        assert tree.root.feature == 0
        assert tree.root.threshold == 4.5
        assert tree.predict(X).tolist() == y.tolist()

    def test_separable_training_accuracy(self, two_blobs):
        """Test perfect training accuracy on separable blobs."""
        X, y = two_blobs
        assert np.array_equal(DecisionTree().fit(X, y).predict(X), y)

    def test_max_depth(self):
        """Test no leaf is deeper than max_depth."""
        rng = np.random.default_rng(1)
        X = rng.normal(size=(200, 4))
        y = rng.integers(0, 3, 200)
        tree = DecisionTree(max_depth=3).fit(X, y)
        assert tree.depth() <= 3

    def test_min_samples_leaf(self):
        """Test leaves hold at least min_samples_leaf training rows."""
        rng = np.random.default_rng(2)
        X = rng.normal(size=(120, 2))
        y = rng.integers(0, 2, 120)
        tree = DecisionTree(min_samples_leaf=10).fit(X, y)
        leaves = {}
        for node, _ in tree.nodes():
            if node.is_leaf:
                leaves[id(node)] = 0
        # Route the training rows and count leaf occupancy.
        for row in X:
            node = tree.root
            while not node.is_leaf:
                node = node.left if row[node.feature] <= node.threshold else node.right
            leaves[id(node)] += 1
        assert min(leaves.values()) >= 10

    def test_internal_nodes_have_two_children(self, two_blobs):
        """Test every internal node has non-null children."""
        X, y = two_blobs
        for node, _ in DecisionTree(max_features=1).fit(X, y, np.random.default_rng(3)).nodes():
            assert (node.left is None) == (node.right is None)

    def test_constant_features_make_a_leaf(self):
        """Test identical rows with mixed labels give a majority leaf."""
        X = np.ones((5, 2))
        tree = DecisionTree(n_classes=2).fit(X, np.array([0, 1, 1, 0, 1]))
        assert tree.root.is_leaf
        assert tree.root.value == 1

    def test_predict_wrong_width(self, two_blobs):
        """Test predicting with the wrong feature count."""
        X, y = two_blobs
        tree = DecisionTree().fit(X, y)
        with pytest.raises(ArgumentError):
            tree.predict(np.zeros((2, 2)))

    def test_unknown_criterion(self):
        """Test an unknown split criterion is rejected."""
        with pytest.raises(ArgumentError):
            DecisionTree(criterion="entropy")


class TestRegressionTree:
    """Test squared-error trees."""

    def test_leaf_means(self):
        """Test leaves hold the mean target of their rows."""
        X = np.array([[0.0], [1.0], [2.0], [10.0], [11.0]])
        y = np.array([1.0, 1.0, 1.0, 5.0, 7.0])
        tree = DecisionTree(criterion=SQUARED_ERROR, max_depth=1).fit(X, y)
        assert tree.predict(np.array([[0.5], [10.5]])).tolist() == [1.0, 6.0]

    def test_depth_limit(self):
        """Test depth-limited regression trees."""
        rng = np.random.default_rng(4)
        X = rng.normal(size=(100, 3))
        tree = DecisionTree(criterion=SQUARED_ERROR, max_depth=3).fit(X, rng.normal(size=100))
        assert tree.depth() <= 3


class TestTreeSerialization:
    """Test tree dictionary conversion."""

    def test_round_trip_predictions(self, two_blobs):
        """Test a rebuilt tree predicts identically."""
        X, y = two_blobs
        tree = DecisionTree(criterion=GINI, max_depth=4).fit(X, y)
        rebuilt = DecisionTree.from_dict(tree.to_dict())
        assert np.array_equal(rebuilt.predict(X), tree.predict(X))
        assert rebuilt.max_depth == 4

    def test_leaf_node(self):
        """Test a leaf node converts to its value only."""
        assert TreeNode(value=2).to_dict() == {"value": 2}
        assert TreeNode.from_dict({"value": 2}).is_leaf
