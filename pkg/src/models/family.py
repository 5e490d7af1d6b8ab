"""Uniform fit/predict surface over the three classifier families."""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Union

import numpy as np

from src.errors import ArgumentError
from src.models.boosting import GradientBoostModel, gb_decision_scores, gb_fit, softmax
from src.models.forest import RandomForestModel, rf_fit, rf_vote_counts
from src.models.svm import LinearSvmModel, svm_decision_values, svm_fit

Model = Union[RandomForestModel, LinearSvmModel, GradientBoostModel]


class ModelFamily(Enum):
    """Classifier families, in report row order."""

    SVM = "svm"
    GBOOST = "gboost"
    RF = "rf"

    @property
    def display_name(self) -> str:
        return {"svm": "SVM", "gboost": "Gradient Boost", "rf": "Random Forest"}[self.value]

    @classmethod
    def parse(cls, name: str) -> "ModelFamily":
        """Resolve a family from its flag value or display name."""
        key = name.strip().lower()
        for family in cls:
            if key in (family.value, family.display_name.lower()):
                return family
        raise ArgumentError(f"Unknown model family: {name!r}")

    @classmethod
    def of(cls, model: Model) -> "ModelFamily":
        """Family of a trained model."""
        if isinstance(model, RandomForestModel):
            return cls.RF
        if isinstance(model, LinearSvmModel):
            return cls.SVM
        if isinstance(model, GradientBoostModel):
            return cls.GBOOST
        raise ArgumentError(f"Not a classifier model: {type(model).__name__}")


@dataclass
class ModelParams:
    """Hyperparameters for every family; defaults follow the reference protocol."""

    n_trees: int = 100
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1
    svm_c: float = 1.0
    svm_epochs: int = 200
    gb_stages: int = 100
    gb_eta: float = 0.1
    gb_depth: int = 3
    seed: int = 7
    n_jobs: int = 1

    def to_dict(self) -> Dict:
        """Convert to dictionary."""
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, data: Dict) -> "ModelParams":
        """Create from dictionary."""
        return cls(**data)


@dataclass(frozen=True, eq=False)
class Predictions:
    """Batch output: class per row, confidence in it, and class probabilities.

    Confidence follows the family: RF vote fraction, SVM largest decision
    value, GB largest probability. SVM probabilities are one-hot.
    """

    classes: np.ndarray
    confidences: np.ndarray
    probabilities: np.ndarray


def fit_family(
    family: ModelFamily,
    features: np.ndarray,
    labels: np.ndarray,
    params: ModelParams,
    n_classes: Optional[int] = None,
) -> Model:
    """Train one model of the given family."""
    if family is ModelFamily.RF:
        return rf_fit(
            features,
            labels,
            n_trees=params.n_trees,
            seed=params.seed,
            max_depth=params.max_depth,
            min_samples_leaf=params.min_samples_leaf,
            n_classes=n_classes,
            n_jobs=params.n_jobs,
        )
    if family is ModelFamily.SVM:
        return svm_fit(
            features, labels, C=params.svm_c, epochs=params.svm_epochs, seed=params.seed, n_classes=n_classes
        )
    return gb_fit(
        features,
        labels,
        n_stages=params.gb_stages,
        learning_rate=params.gb_eta,
        tree_depth=params.gb_depth,
        seed=params.seed,
        n_classes=n_classes,
        n_jobs=params.n_jobs,
    )


def predict_family(model: Model, X: np.ndarray) -> Predictions:
    """Classes, confidences and probabilities for every row of X."""
    family = ModelFamily.of(model)
    if family is ModelFamily.RF:
        counts = rf_vote_counts(model, X)
        classes = np.argmax(counts, axis=1)
        probabilities = counts / model.n_trees
        confidences = probabilities[np.arange(classes.shape[0]), classes]
    elif family is ModelFamily.SVM:
        values = svm_decision_values(model, X)
        classes = np.argmax(values, axis=1)
        confidences = values[np.arange(classes.shape[0]), classes]
        probabilities = np.eye(model.n_classes)[classes]
    else:
        scores = gb_decision_scores(model, X)
        probabilities = softmax(scores)
        classes = np.argmax(scores, axis=1)
        confidences = probabilities[np.arange(classes.shape[0]), classes]
    return Predictions(classes.astype(np.int64), confidences, probabilities)
