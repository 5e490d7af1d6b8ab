"""Unit tests for run configuration."""

import json

import pytest

from src.core import SensorKind
from src.errors import ConfigurationError, IngestionError
from src.models.family import ModelFamily
from src.run_config import RunConfig, load_adapter, load_json


class TestRunConfigDefaults:
    """Test default values."""

    def test_protocol_defaults(self):
        """Test the 80/20 split, 100 trees and feature fusion over all sensors."""
        config = RunConfig()
        assert config.ratio == 0.8
        assert config.n_trees == 100
        assert config.fusion == "feature"
        assert config.sensor_kinds() == (SensorKind.ACCELEROMETER, SensorKind.GYROSCOPE, SensorKind.MAGNETOMETER)

    def test_model_params(self):
        """Test hyperparameters carry over to the trainers."""
        params = RunConfig(seed=11, gb_stages=20, n_jobs=2).model_params()
        assert params.seed == 11
        assert params.gb_stages == 20
        assert params.n_jobs == 2

    def test_kalman_config(self):
        """Test the filter uses the configured noise scales."""
        config = RunConfig(q_scale=0.2, r_scale=1.0).kalman_config()
        assert config.Q[0, 0] == 0.2
        assert config.R[0, 0] == 1.0

    def test_families(self):
        """Test model names resolve to families."""
        config = RunConfig(model="Gradient Boost", decision_base="svm")
        assert config.model_family() is ModelFamily.GBOOST
        assert config.decision_family() is ModelFamily.SVM


class TestRunConfigValidation:
    """Test invalid configurations."""

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"fusion": "early"},
            {"dataset_kind": "tabular"},
            {"model": "knn"},
            {"sensors": ["barometer"]},
            {"subset": "validation"},
            {"bins": 0},
            {"tolerance_ms": -1},
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        """Test invalid values are configuration errors."""
        with pytest.raises(ConfigurationError):
            RunConfig(**kwargs)

    def test_overrides_skip_none(self):
        """Test None overrides keep the current value."""
        config = RunConfig(seed=3).with_overrides(seed=None, model="svm")
        assert config.seed == 3
        assert config.model == "svm"

    def test_overrides_are_validated(self):
        """Test overrides go through validation."""
        with pytest.raises(ConfigurationError):
            RunConfig().with_overrides(fusion="late")


class TestRunConfigPersistence:
    """Test JSON round trips."""

    def test_save_and_load(self, temp_dir):
        """Test a saved configuration loads back equal."""
        config = RunConfig(inputs=["a.csv"], model="svm", sensors=["mag"], seed=42)
        loaded = RunConfig.load(config.save(temp_dir / "config.json"))
        assert loaded == config

    def test_adapter_round_trip(self, temp_dir):
        """Test the adapter mapping survives save and load."""
        adapter = {"channels": {"ax": "Acceleration X (g)"}, "timestamp_column": "t", "label_column": "y"}
        config = RunConfig.from_dict({"dataset_kind": "secondary", "adapter": adapter})
        loaded = RunConfig.load(config.save(temp_dir / "config.json"))
        assert loaded.adapter.timestamp_column == "t"
        assert loaded.adapter.channels == {"ax": "Acceleration X (g)"}

    def test_unknown_key(self):
        """Test unknown keys are configuration errors."""
        with pytest.raises(ConfigurationError) as info:
            RunConfig.from_dict({"seed": 1, "colour": "red"})
        assert "colour" in str(info.value)

    def test_wrong_type(self):
        """Test a non-object document is rejected."""
        with pytest.raises(ConfigurationError):
            RunConfig.from_dict(["seed", 1])

    def test_malformed_json(self, temp_dir):
        """Test a JSON syntax error reports line and column."""
        path = temp_dir / "bad.json"
        path.write_text('{\n  "seed": ,\n}', encoding="utf-8")
        with pytest.raises(ConfigurationError) as info:
            RunConfig.load(path)
        assert "line 2" in str(info.value)

    def test_missing_file(self, temp_dir):
        """Test a missing file is an ingestion error."""
        with pytest.raises(IngestionError):
            load_json(temp_dir / "absent.json", "configuration")


class TestLoadAdapter:
    """Test adapter files."""

    def test_load(self, temp_dir):
        """Test reading a channel mapping."""
        path = temp_dir / "adapter.json"
        path.write_text(json.dumps({"channels": {"gx": "Angular velocity X"}}), encoding="utf-8")
        adapter = load_adapter(path)
        assert adapter.channels == {"gx": "Angular velocity X"}
        assert adapter.label_column == "activity"

    def test_missing_channels(self, temp_dir):
        """Test an adapter without a channel object is rejected."""
        path = temp_dir / "adapter.json"
        path.write_text(json.dumps({"timestamp_column": "t"}), encoding="utf-8")
        with pytest.raises(ConfigurationError):
            load_adapter(path)
