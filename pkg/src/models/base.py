"""Input checks and seeding shared by the trainers."""

from typing import Optional, Tuple

import numpy as np

from src.core import check_seed
from src.errors import ArgumentError, DegenerateModelError


def validate_training(
    features: np.ndarray, labels: np.ndarray, n_classes: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray, int]:
    """Check a training set and resolve K.

    Returns:
        Tuple of (float matrix, integer labels, K)

    Raises:
        ArgumentError: If shapes disagree or values are not finite
        DegenerateModelError: If fewer than two rows or two classes are present
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels).reshape(-1)
    if X.ndim != 2:
        raise ArgumentError(f"Features must be an N x d matrix, got shape {X.shape}")
    if X.shape[0] != y.shape[0]:
        raise ArgumentError(f"{X.shape[0]} feature rows but {y.shape[0]} labels")
    if not np.all(np.isfinite(X)):
        raise ArgumentError("Features contain non-finite values")
    if y.shape[0] and (not np.issubdtype(y.dtype, np.integer) or y.min() < 0):
        raise ArgumentError("Labels must be non-negative class indices")
    y = y.astype(np.int64)
    if X.shape[0] < 2 or np.unique(y).shape[0] < 2:
        raise DegenerateModelError("Training needs at least two rows and two classes")

    k = int(y.max()) + 1 if n_classes is None else int(n_classes)
    if y.max() >= k:
        raise ArgumentError(f"Label {int(y.max())} is outside K={k}")
    return X, y, k


def check_features(x: np.ndarray, n_features: int) -> np.ndarray:
    """Coerce one vector or a matrix of probes to 2-D and check its width."""
    X = np.asarray(x, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != n_features:
        raise ArgumentError(f"Expected {n_features} features, got shape {np.shape(x)}")
    return X


def derive_seed(seed: int, index: int) -> int:
    """Child seed for member ``index``, independent of training order."""
    sequence = np.random.SeedSequence([check_seed(seed), index])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])
