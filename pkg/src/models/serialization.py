"""Versioned JSON persistence for trained models."""

import json
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np

from src.core import SENSOR_ORDER
from src.errors import ConfigurationError, IngestionError
from src.models.boosting import GradientBoostModel
from src.models.family import Model, ModelFamily
from src.models.forest import RandomForestModel
from src.models.svm import LinearSvmModel
from src.models.tree import DecisionTree
from src.models.voting import DecisionFusionModel

FORMAT_VERSION = 1

AnyModel = Union[Model, DecisionFusionModel]

_TYPE_NAMES = {
    ModelFamily.RF: "random_forest",
    ModelFamily.SVM: "linear_svm",
    ModelFamily.GBOOST: "gradient_boost",
}
_DECISION_FUSION = "decision_fusion"


class ModelSerializer:
    """Converts models to and from the versioned JSON document."""

    @staticmethod
    def _body(model: AnyModel) -> Tuple[str, Dict]:
        if isinstance(model, DecisionFusionModel):
            members = {kind.value: ModelSerializer.to_dict(model.members[kind]) for kind in SENSOR_ORDER}
            return _DECISION_FUSION, {
                "family": model.family.value,
                "n_classes": model.n_classes,
                "members": members,
            }

        family = ModelFamily.of(model)
        if family is ModelFamily.RF:
            body = {
                "n_classes": model.n_classes,
                "n_features": model.n_features,
                "seed": model.seed,
                "tree_seeds": list(model.tree_seeds),
                "max_features": model.max_features,
                "max_depth": model.max_depth,
                "min_samples_leaf": model.min_samples_leaf,
                "trees": [tree.to_dict() for tree in model.trees],
            }
        elif family is ModelFamily.SVM:
            body = {
                "weights": model.weights.tolist(),
                "biases": model.biases.tolist(),
                "mean": model.mean.tolist(),
                "scale": model.scale.tolist(),
            }
        else:
            body = {
                "initial_scores": model.initial_scores.tolist(),
                "learning_rate": model.learning_rate,
                "n_features": model.n_features,
                "tree_depth": model.tree_depth,
                "seed": model.seed,
                "loss_history": list(model.loss_history),
                "trees": [[tree.to_dict() for tree in sequence] for sequence in model.trees],
            }
        return _TYPE_NAMES[family], body

    @staticmethod
    def to_dict(model: AnyModel, metadata: Optional[Dict] = None) -> Dict:
        """Convert a model to its versioned document.

        Args:
            model: Trained model
            metadata: Extra information stored alongside (feature view, class names)

        Returns:
            JSON-ready dictionary
        """
        model_type, body = ModelSerializer._body(model)
        document = {"format_version": FORMAT_VERSION, "model_type": model_type, "model": body}
        if metadata is not None:
            document["metadata"] = metadata
        return document

    @staticmethod
    def from_dict(document: Dict) -> Tuple[AnyModel, Dict]:
        """Rebuild a model from its document.

        Returns:
            Tuple of (model, metadata)

        Raises:
            ConfigurationError: If the document is not a supported model
        """
        if not isinstance(document, dict):
            raise ConfigurationError("Model document must be a JSON object")
        version = document.get("format_version")
        if version != FORMAT_VERSION:
            raise ConfigurationError(f"Unsupported model format version: {version!r}")
        model_type = document.get("model_type")
        body = document.get("model")
        if not isinstance(body, dict):
            raise ConfigurationError("Model document has no 'model' object")

        try:
            if model_type == _DECISION_FUSION:
                members = {
                    kind: ModelSerializer.from_dict(body["members"][kind.value])[0] for kind in SENSOR_ORDER
                }
                model = DecisionFusionModel(
                    family=ModelFamily.parse(body["family"]), members=members, n_classes=int(body["n_classes"])
                )
            elif model_type == _TYPE_NAMES[ModelFamily.RF]:
                model = RandomForestModel(
                    trees=[DecisionTree.from_dict(t) for t in body["trees"]],
                    n_classes=int(body["n_classes"]),
                    n_features=int(body["n_features"]),
                    seed=int(body["seed"]),
                    tree_seeds=[int(s) for s in body["tree_seeds"]],
                    max_features=int(body["max_features"]),
                    max_depth=body.get("max_depth"),
                    min_samples_leaf=int(body.get("min_samples_leaf", 1)),
                )
            elif model_type == _TYPE_NAMES[ModelFamily.SVM]:
                model = LinearSvmModel(
                    weights=np.array(body["weights"]),
                    biases=np.array(body["biases"]),
                    mean=np.array(body["mean"]),
                    scale=np.array(body["scale"]),
                )
            elif model_type == _TYPE_NAMES[ModelFamily.GBOOST]:
                model = GradientBoostModel(
                    initial_scores=np.array(body["initial_scores"]),
                    trees=[[DecisionTree.from_dict(t) for t in seq] for seq in body["trees"]],
                    learning_rate=float(body["learning_rate"]),
                    n_features=int(body["n_features"]),
                    tree_depth=int(body.get("tree_depth", 3)),
                    seed=int(body.get("seed", 7)),
                    loss_history=[float(v) for v in body.get("loss_history", [])],
                )
            else:
                raise ConfigurationError(f"Unknown model type: {model_type!r}")
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigurationError(f"Malformed {model_type} document: {e}")
        return model, document.get("metadata", {})

    @staticmethod
    def get_json_error(content: str) -> Optional[str]:
        """Error message for malformed JSON, None if it parses."""
        if not content or not content.strip():
            return "Empty content"
        try:
            json.loads(content)
            return None
        except json.JSONDecodeError as e:
            return f"JSON Error at line {e.lineno}, column {e.colno}: {e.msg}"

    @staticmethod
    def dumps(model: AnyModel, metadata: Optional[Dict] = None) -> str:
        """Serialize to compact JSON text."""
        return json.dumps(ModelSerializer.to_dict(model, metadata), separators=(",", ":")) + "\n"

    @staticmethod
    def loads(content: str) -> Tuple[AnyModel, Dict]:
        """Parse JSON text into (model, metadata).

        Raises:
            ConfigurationError: If the text is not valid JSON or not a model document
        """
        error = ModelSerializer.get_json_error(content)
        if error is not None:
            raise ConfigurationError(f"Invalid model file: {error}")
        return ModelSerializer.from_dict(json.loads(content))

    @staticmethod
    def load(path: str | Path) -> Tuple[AnyModel, Dict]:
        """Read a model file.

        Raises:
            IngestionError: If the file cannot be read
            ConfigurationError: If its content is not a model document
        """
        path = Path(path)
        if not path.exists():
            raise IngestionError(f"File not found: {path}")
        try:
            content = path.read_text(encoding="utf-8")
        except OSError as e:
            raise IngestionError(f"Failed to read file {path}: {e}")
        return ModelSerializer.loads(content)
