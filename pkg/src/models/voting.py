"""Decision-level fusion: one model per sensor, combined by majority vote."""

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from src.core import SENSOR_ORDER, SensorKind
from src.errors import ArgumentError
from src.models.family import Model, ModelFamily, ModelParams, Predictions, fit_family, predict_family

logger = logging.getLogger(__name__)


def majority_vote(
    per_sensor_predictions: Sequence[int],
    per_sensor_confidences: Optional[Sequence[Optional[float]]] = None,
) -> int:
    """Combine per-sensor class predictions.

    The most frequent class wins. When several classes share the top count
    (with three voters: all three differ), the most confident prediction among
    them wins; equal confidences go to the lowest class index.

    Args:
        per_sensor_predictions: One class index per sensor model
        per_sensor_confidences: Matching confidences, needed only to break ties

    Returns:
        Winning class index

    Raises:
        ArgumentError: If there are no predictions, lengths differ, or a needed confidence is missing
    """
    predictions = [int(p) for p in per_sensor_predictions]
    if not predictions:
        raise ArgumentError("majority_vote needs at least one prediction")
    if per_sensor_confidences is not None and len(per_sensor_confidences) != len(predictions):
        raise ArgumentError("Need exactly one confidence per prediction")

    counts = Counter(predictions)
    top = max(counts.values())
    leaders = sorted(c for c, n in counts.items() if n == top)
    if len(leaders) == 1:
        return leaders[0]

    if per_sensor_confidences is None or any(
        per_sensor_confidences[i] is None for i, p in enumerate(predictions) if p in leaders
    ):
        raise ArgumentError("Tied vote needs a confidence for every tied prediction")

    best_class, best_confidence = None, -np.inf
    for p, confidence in sorted(zip(predictions, per_sensor_confidences), key=lambda pair: pair[0]):
        if p in leaders and confidence > best_confidence:
            best_class, best_confidence = p, confidence
    return best_class


@dataclass(eq=False)
class DecisionFusionModel:
    """Per-sensor base models of one family."""

    family: ModelFamily
    members: Dict[SensorKind, Model]
    n_classes: int

    def __post_init__(self):
        if set(self.members) != set(SENSOR_ORDER):
            raise ArgumentError("Decision fusion needs one model per sensor")


def fit_decision_fusion(
    channels: np.ndarray,
    labels: np.ndarray,
    family: ModelFamily,
    params: ModelParams,
    n_classes: Optional[int] = None,
) -> DecisionFusionModel:
    """Train one base model per sensor on its own three channels.

    Args:
        channels: N x 9 matrix in canonical channel order
        labels: Class index per row
        family: Base-model family
        params: Hyperparameters
        n_classes: K, defaults to max label + 1

    Returns:
        DecisionFusionModel
    """
    channels = np.asarray(channels, dtype=np.float64)
    if channels.ndim != 2 or channels.shape[1] != 3 * len(SENSOR_ORDER):
        raise ArgumentError(f"Decision fusion trains on N x 9 channels, got {channels.shape}")
    k = int(np.max(labels)) + 1 if n_classes is None else n_classes
    members = {}
    for kind in SENSOR_ORDER:
        logger.info("Decision fusion: training %s on %s", family.display_name, kind.value)
        members[kind] = fit_family(family, channels[:, list(kind.columns)], labels, params, k)
    return DecisionFusionModel(family=family, members=members, n_classes=k)


def predict_decision_fusion(model: DecisionFusionModel, channels: np.ndarray) -> Predictions:
    """Vote every row; confidence is the share of sensors backing the winner."""
    channels = np.asarray(channels, dtype=np.float64)
    if channels.ndim != 2 or channels.shape[1] != 3 * len(SENSOR_ORDER):
        raise ArgumentError(f"Decision fusion predicts from N x 9 channels, got {channels.shape}")
    member_output = [predict_family(model.members[kind], channels[:, list(kind.columns)]) for kind in SENSOR_ORDER]
    votes = np.column_stack([out.classes for out in member_output])
    confidences = np.column_stack([out.confidences for out in member_output])

    classes = np.array(
        [majority_vote(row_votes, row_conf) for row_votes, row_conf in zip(votes.tolist(), confidences.tolist())],
        dtype=np.int64,
    )
    support = (votes == classes[:, None]).sum(axis=1) / len(SENSOR_ORDER)
    return Predictions(classes, support, np.eye(model.n_classes)[classes])
