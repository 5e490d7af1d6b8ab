"""Command implementations: dataset loading, training views, comparison and exploration."""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple

import jsonschema
import numpy as np
import pandas as pd

from src.charts import grouped_bar_chart, heatmap
from src.core import FEATURE_NAMES, SENSOR_ORDER, Dataset, SensorKind, TrainTestSplit, train_test_split
from src.errors import ConfigurationError, IngestionError
from src.evaluation import MetricsReport, correlation_matrix, evaluate, histogram
from src.fusion import KalmanConfig, feature_fuse, kalman_filter_dataset
from src.ingest import (
    SynthConfig,
    dataset_to_frame,
    generate_synthetic,
    load_primary,
    parse_secondary_csv,
    read_input,
)
from src.models.family import ModelFamily, fit_family, predict_family
from src.models.serialization import AnyModel
from src.models.voting import DecisionFusionModel, fit_decision_fusion, predict_decision_fusion
from src.report_writer import ReportWriter
from src.run_config import RunConfig

logger = logging.getLogger(__name__)

REPORT_VERSION = 1
SCHEMA_PATH = Path(__file__).parent / "schemas" / "comparison_report.schema.json"

GRID_COLUMNS: Tuple[str, ...] = tuple(kind.short_name for kind in SENSOR_ORDER) + ("feature_fusion",)
COLUMN_TITLES = {
    "acc": "Accelerometer",
    "gyr": "Gyroscope",
    "mag": "Magnetometer",
    "feature_fusion": "Feature fusion",
    "decision_fusion": "Decision fusion",
    "kalman_fusion": "Kalman fusion",
}
CHANNEL_SLUGS: Tuple[str, ...] = tuple(
    f"{kind.short_name}_{axis}" for kind in SENSOR_ORDER for axis in ("x", "y", "z")
)


def synth_config(config: RunConfig) -> SynthConfig:
    """Synthetic generator settings for the configured preset."""
    per_class = config.samples_per_class
    if config.preset == "separable":
        return SynthConfig.separable(seed=config.seed, samples_per_class=per_class or 250)
    if config.preset == "noiseless":
        return SynthConfig.simplex((10.0, 10.0, 10.0), samples_per_class=per_class or 250, stddev=0.0, seed=config.seed)
    return SynthConfig.graded(seed=config.seed, samples_per_class=per_class or 400)


def load_dataset(config: RunConfig) -> Dataset:
    """Read or generate the dataset a command works on.

    Raises:
        IngestionError: If the inputs are missing, unreadable or hold no rows
        ConfigurationError: If a secondary dataset has no adapter
    """
    if config.dataset_kind == "synthetic":
        dataset = generate_synthetic(synth_config(config))
    else:
        if not config.inputs:
            raise IngestionError("No input file given")
        if config.dataset_kind == "secondary":
            if config.adapter is None:
                raise ConfigurationError("A secondary dataset needs an adapter mapping")
            if len(config.inputs) != 1:
                raise IngestionError("A secondary dataset is read from a single file")
            dataset = parse_secondary_csv(read_input(config.inputs[0]), config.adapter)
        else:
            dataset = load_primary(config.inputs, config.tolerance_ms)

    if len(dataset) == 0:
        raise IngestionError("Dataset has no rows after cleaning")
    logger.info(
        "Loaded %s dataset: %d rows, K=%d, %d dropped", config.dataset_kind, len(dataset), dataset.num_classes,
        dataset.dropped_rows,
    )
    return dataset


def view_metadata(config: RunConfig) -> Dict:
    """Description of the feature view a model is trained on."""
    meta = {"fusion": config.fusion, "sensors": [kind.short_name for kind in config.sensor_kinds()]}
    if config.fusion == "kalman":
        meta["kalman"] = {
            "q_scale": config.q_scale,
            "r_scale": config.r_scale,
            "initial_covariance": config.initial_covariance,
        }
    return meta


def view_features(dataset: Dataset, view: Dict) -> np.ndarray:
    """Feature matrix of a view described by :func:`view_metadata`.

    Kalman views expect the dataset to be filtered already; decision views
    return all nine channels.
    """
    fusion = view.get("fusion")
    if fusion == "kalman":
        if dataset.kalman is None:
            raise ConfigurationError("Kalman view needs a filtered dataset")
        return np.asarray(dataset.kalman)
    if fusion == "decision":
        return np.asarray(dataset.channels)
    sensors = [SensorKind.parse(name) for name in view.get("sensors", [])]
    if fusion == "none" and len(sensors) != 1:
        raise ConfigurationError("Fusion 'none' trains on exactly one sensor; use --fusion feature for several")
    if fusion not in ("none", "feature"):
        raise ConfigurationError(f"Unknown fusion mode {fusion!r}")
    return feature_fuse(dataset, sensors).matrix


def prepare_view_dataset(dataset: Dataset, view: Dict) -> Dataset:
    """Filter the whole dataset in timestamp order when the view needs Kalman columns."""
    if view.get("fusion") != "kalman":
        return dataset
    settings = view.get("kalman", {})
    config = KalmanConfig.stacked(
        settings.get("q_scale", 0.1), settings.get("r_scale", 0.5), settings.get("initial_covariance", 1.0)
    )
    return kalman_filter_dataset(dataset, config)


def split_dataset(dataset: Dataset, config: RunConfig) -> Tuple[TrainTestSplit, Dataset, Dataset]:
    """Seeded split and the two row subsets."""
    split = train_test_split(dataset, config.ratio, config.seed)
    return split, dataset.subset(split.train_indices), dataset.subset(split.test_indices)


def _fit_view(train: Dataset, view: Dict, config: RunConfig) -> AnyModel:
    X = view_features(train, view)
    k = train.num_classes
    if view["fusion"] == "decision":
        return fit_decision_fusion(X, train.labels, config.model_family(), config.model_params(), k)
    return fit_family(config.model_family(), X, train.labels, config.model_params(), k)


def predict_view(model: AnyModel, dataset: Dataset, view: Dict):
    """Predictions of a trained model on its view of a dataset."""
    X = view_features(dataset, view)
    if isinstance(model, DecisionFusionModel):
        return predict_decision_fusion(model, X)
    return predict_family(model, X)


def score(model: AnyModel, dataset: Dataset, view: Dict, num_classes: int) -> MetricsReport:
    """Metrics of a model on a dataset."""
    predictions = predict_view(model, dataset, view)
    return evaluate(dataset.labels, predictions.classes, num_classes, predictions.probabilities)


def train_model(config: RunConfig) -> Tuple[AnyModel, Dict, Dataset]:
    """Train the configured model on the training split.

    Returns:
        Tuple of (model, metadata to store with it, full dataset)
    """
    dataset = load_dataset(config)
    view = view_metadata(config)
    prepared = prepare_view_dataset(dataset, view)
    split, train, _ = split_dataset(prepared, config)
    model = _fit_view(train, view, config)
    metadata = {
        "view": view,
        "class_names": dataset.class_names(),
        "split": split.to_dict(),
        "n_rows": len(dataset),
        "dataset_kind": config.dataset_kind,
    }
    return model, metadata, dataset


def evaluate_model(model: AnyModel, metadata: Dict, config: RunConfig) -> Tuple[MetricsReport, List[str]]:
    """Score a saved model on the configured subset of the dataset.

    Train/test subsets are rebuilt from the split stored with the model.

    Returns:
        Tuple of (metrics, class names)
    """
    view = metadata.get("view")
    if not isinstance(view, dict):
        raise ConfigurationError("Model file has no feature-view metadata")
    dataset = prepare_view_dataset(load_dataset(config), view)

    if config.subset != "all":
        split_meta = metadata.get("split", {})
        if metadata.get("n_rows") != len(dataset):
            raise ConfigurationError(
                f"Model was trained on {metadata.get('n_rows')} rows, dataset has {len(dataset)}; use --subset all"
            )
        split = train_test_split(dataset, split_meta.get("ratio", config.ratio), split_meta.get("seed", config.seed))
        indices = split.train_indices if config.subset == "train" else split.test_indices
        dataset = dataset.subset(indices)

    class_names = list(metadata.get("class_names") or dataset.class_names())
    k = max(len(class_names), dataset.num_classes)
    class_names += [f"class_{i}" for i in range(len(class_names), k)]
    return score(model, dataset, view, k), class_names


def breakdown_frame(report: MetricsReport, class_names: List[str]) -> pd.DataFrame:
    """class,TP,FP,FN,TN table."""
    rows = [{"class": class_names[b.class_index], "TP": b.tp, "FP": b.fp, "FN": b.fn, "TN": b.tn} for b in report.breakdowns]
    return pd.DataFrame(rows, columns=["class", "TP", "FP", "FN", "TN"])


def write_metrics(writer: ReportWriter, cell: str, report: MetricsReport, class_names: List[str]) -> None:
    """Confusion and breakdown CSVs of one evaluated cell."""
    writer.write_csv(f"confusion_{cell}.csv", report.confusion.to_frame(class_names))
    writer.write_csv(f"breakdown_{cell}.csv", breakdown_frame(report, class_names))


@dataclass
class ComparisonResult:
    """Every evaluated cell of a comparison run, keyed by cell id."""

    dataset: Dataset
    split: TrainTestSplit
    cells: Dict[str, MetricsReport]
    decision_base: ModelFamily

    @staticmethod
    def cell_id(family: ModelFamily, column: str) -> str:
        return f"{family.value}_{column}"

    def to_report(self, dataset_kind: str) -> Dict:
        """Table-shaped JSON report."""
        class_names = self.dataset.class_names()
        grid = []
        for family in ModelFamily:
            cells = {}
            for column in GRID_COLUMNS:
                metrics = self.cells[self.cell_id(family, column)]
                cells[column] = {"accuracy": metrics.accuracy, "rmse": metrics.rmse}
            grid.append({"model": family.display_name, "cells": cells})

        decision = self.cells["decision_fusion"]
        kalman = self.cells["kalman_fusion"]
        return {
            "format_version": REPORT_VERSION,
            "dataset": {
                "kind": dataset_kind,
                "n_rows": len(self.dataset),
                "num_classes": self.dataset.num_classes,
                "class_names": class_names,
                "dropped_rows": self.dataset.dropped_rows,
            },
            "split": self.split.to_dict(),
            "rows": [family.display_name for family in ModelFamily],
            "columns": list(GRID_COLUMNS),
            "grid": grid,
            "decision_fusion": {
                "base_model": self.decision_base.display_name,
                "accuracy": decision.accuracy,
                "rmse": decision.rmse,
            },
            "kalman_fusion": {
                "model": ModelFamily.RF.display_name,
                "accuracy": kalman.accuracy,
                "rmse": kalman.rmse,
            },
            "details": {cell: report.to_dict(class_names) for cell, report in sorted(self.cells.items())},
        }

    def chart(self) -> str:
        """Grouped accuracy bars, one group per model family."""
        series = [COLUMN_TITLES[c] for c in GRID_COLUMNS] + [COLUMN_TITLES["decision_fusion"], COLUMN_TITLES["kalman_fusion"]]
        values = {}
        for family in ModelFamily:
            for column in GRID_COLUMNS:
                values[(family.display_name, COLUMN_TITLES[column])] = self.cells[self.cell_id(family, column)].accuracy
        values[(self.decision_base.display_name, COLUMN_TITLES["decision_fusion"])] = self.cells["decision_fusion"].accuracy
        values[(ModelFamily.RF.display_name, COLUMN_TITLES["kalman_fusion"])] = self.cells["kalman_fusion"].accuracy
        return grouped_bar_chart(
            [family.display_name for family in ModelFamily], series, values, "Effect of data fusion on three models"
        )


def run_comparison(dataset: Dataset, config: RunConfig) -> ComparisonResult:
    """Train and test every model family on every sensor and fusion strategy.

    All cells share one seeded split. The Kalman cell filters the whole
    dataset in timestamp order, then trains a random forest on the filtered
    columns of the training rows.
    """
    split, train, test = split_dataset(dataset, config)
    k = dataset.num_classes
    params = config.model_params()
    cells: Dict[str, MetricsReport] = {}

    for family in ModelFamily:
        for column in GRID_COLUMNS:
            sensors = SENSOR_ORDER if column == "feature_fusion" else (SensorKind.parse(column),)
            X_train = feature_fuse(train, sensors).matrix
            X_test = feature_fuse(test, sensors).matrix
            logger.info("Compare: %s on %s", family.display_name, column)
            model = fit_family(family, X_train, train.labels, params, k)
            predictions = predict_family(model, X_test)
            cells[ComparisonResult.cell_id(family, column)] = evaluate(
                test.labels, predictions.classes, k, predictions.probabilities
            )

    base = config.decision_family()
    logger.info("Compare: decision fusion over %s", base.display_name)
    voter = fit_decision_fusion(train.channels, train.labels, base, params, k)
    predictions = predict_decision_fusion(voter, test.channels)
    cells["decision_fusion"] = evaluate(test.labels, predictions.classes, k, predictions.probabilities)

    logger.info("Compare: Kalman fusion")
    filtered = kalman_filter_dataset(dataset, config.kalman_config())
    kalman_train = filtered.kalman[split.train_indices]
    kalman_test = filtered.kalman[split.test_indices]
    forest = fit_family(ModelFamily.RF, kalman_train, dataset.labels[split.train_indices], params, k)
    predictions = predict_family(forest, kalman_test)
    cells["kalman_fusion"] = evaluate(
        dataset.labels[split.test_indices], predictions.classes, k, predictions.probabilities
    )

    return ComparisonResult(dataset=dataset, split=split, cells=cells, decision_base=base)


def load_report_schema() -> Dict:
    with open(SCHEMA_PATH, "r", encoding="utf-8") as f:
        return json.load(f)


def validate_report(report: Dict) -> None:
    """Check a comparison report against the committed schema.

    Raises:
        ConfigurationError: If the report does not match the schema
    """
    try:
        jsonschema.validate(report, load_report_schema())
    except jsonschema.ValidationError as e:
        raise ConfigurationError(f"Comparison report does not match its schema: {e.message}")


def write_comparison(result: ComparisonResult, config: RunConfig, writer: ReportWriter) -> Dict:
    """Stage the report, per-cell CSVs, chart and effective configuration."""
    report = result.to_report(config.dataset_kind)
    validate_report(report)
    class_names = result.dataset.class_names()
    writer.write_json("comparison_report.json", report)
    for cell, metrics in sorted(result.cells.items()):
        write_metrics(writer, cell, metrics, class_names)
    writer.write_text("accuracy_comparison.svg", result.chart())
    config.save(writer.stage("run_config.json"))
    return report


def write_exploration(dataset: Dataset, config: RunConfig, writer: ReportWriter) -> None:
    """Stage per-channel time series and histograms plus the correlation matrix.

    Raises:
        IngestionError: If the dataset has fewer than two rows
    """
    if len(dataset) < 2:
        raise IngestionError(f"Exploration needs at least two rows, got {len(dataset)}")
    frame = dataset_to_frame(dataset)

    for i, slug in enumerate(CHANNEL_SLUGS):
        name = FEATURE_NAMES[i]
        writer.write_csv(f"timeseries_{slug}.csv", frame[["Timestamp", name, "label"]])
        writer.write_csv(f"histogram_{slug}.csv", histogram(dataset.channels[:, i], config.bins).to_frame())

    r = correlation_matrix(dataset)
    corr = pd.DataFrame(r, columns=list(FEATURE_NAMES))
    corr.insert(0, "channel", list(FEATURE_NAMES))
    writer.write_csv("correlation.csv", corr)
    writer.write_text("correlation.svg", heatmap(r, list(FEATURE_NAMES), "Correlation between sensor channels"))
