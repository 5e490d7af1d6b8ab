"""From-scratch classifiers and decision-level fusion."""

from src.models.boosting import (
    GradientBoostModel,
    cross_entropy,
    gb_decision_scores,
    gb_fit,
    gb_predict,
    gb_predict_proba,
    softmax,
)
from src.models.family import ModelFamily, ModelParams, Predictions, fit_family, predict_family
from src.models.forest import RandomForestModel, RfPrediction, rf_fit, rf_predict, rf_predict_proba, rf_vote_counts
from src.models.serialization import ModelSerializer
from src.models.svm import LinearSvmModel, SvmPrediction, svm_decision_values, svm_fit, svm_predict
from src.models.tree import DecisionTree, TreeNode
from src.models.voting import DecisionFusionModel, fit_decision_fusion, majority_vote, predict_decision_fusion

__all__ = [
    "DecisionFusionModel",
    "DecisionTree",
    "GradientBoostModel",
    "LinearSvmModel",
    "ModelFamily",
    "ModelParams",
    "ModelSerializer",
    "Predictions",
    "RandomForestModel",
    "RfPrediction",
    "SvmPrediction",
    "TreeNode",
    "cross_entropy",
    "fit_decision_fusion",
    "fit_family",
    "gb_decision_scores",
    "gb_fit",
    "gb_predict",
    "gb_predict_proba",
    "majority_vote",
    "predict_decision_fusion",
    "predict_family",
    "rf_fit",
    "rf_predict",
    "rf_predict_proba",
    "rf_vote_counts",
    "softmax",
    "svm_decision_values",
    "svm_fit",
    "svm_predict",
]
