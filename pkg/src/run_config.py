"""Run configuration: defaults, JSON file loading and flag overrides."""

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from src.core import SENSOR_ORDER, SensorKind
from src.errors import ArgumentError, ConfigurationError, IngestionError
from src.fusion import KalmanConfig
from src.ingest import DEFAULT_TOLERANCE_MS, AdapterConfig
from src.models.family import ModelFamily, ModelParams

DATASET_KINDS = ("primary", "secondary", "synthetic")
FUSION_MODES = ("none", "feature", "decision", "kalman")
SYNTH_PRESETS = ("separable", "graded", "noiseless")


@dataclass
class RunConfig:
    """Everything a command needs; defaults follow the reference protocol."""

    inputs: List[str] = field(default_factory=list)
    dataset_kind: str = "primary"
    ratio: float = 0.8
    seed: int = 7
    model: str = "rf"
    fusion: str = "feature"
    sensors: List[str] = field(default_factory=lambda: [kind.short_name for kind in SENSOR_ORDER])
    out: str = "out"
    n_trees: int = 100
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1
    svm_c: float = 1.0
    svm_epochs: int = 200
    gb_stages: int = 100
    gb_eta: float = 0.1
    gb_depth: int = 3
    q_scale: float = 0.1
    r_scale: float = 0.5
    initial_covariance: float = 1.0
    tolerance_ms: int = DEFAULT_TOLERANCE_MS
    bins: int = 30
    decision_base: str = "rf"
    n_jobs: int = 1
    preset: str = "graded"
    samples_per_class: Optional[int] = None
    subset: str = "test"
    model_file: Optional[str] = None
    adapter: Optional[AdapterConfig] = None

    def __post_init__(self):
        if isinstance(self.adapter, dict):
            self.adapter = AdapterConfig.from_dict(self.adapter)
        choices = {
            "dataset_kind": DATASET_KINDS,
            "fusion": FUSION_MODES,
            "preset": SYNTH_PRESETS,
            "subset": ("train", "test", "all"),
        }
        for name, allowed in choices.items():
            if getattr(self, name) not in allowed:
                raise ConfigurationError(f"{name} must be one of {', '.join(allowed)}; got {getattr(self, name)!r}")
        try:
            ModelFamily.parse(self.model)
            ModelFamily.parse(self.decision_base)
            self.sensor_kinds()
        except ArgumentError as e:
            raise ConfigurationError(str(e))
        if self.tolerance_ms < 0 or self.bins < 1 or self.n_jobs == 0:
            raise ConfigurationError("tolerance_ms must be >= 0, bins >= 1 and n_jobs non-zero")

    def sensor_kinds(self) -> Tuple[SensorKind, ...]:
        """Selected sensors in canonical channel order."""
        selected = {SensorKind.parse(name) for name in self.sensors}
        if not selected:
            raise ArgumentError("At least one sensor must be selected")
        return tuple(kind for kind in SENSOR_ORDER if kind in selected)

    def model_family(self) -> ModelFamily:
        return ModelFamily.parse(self.model)

    def decision_family(self) -> ModelFamily:
        return ModelFamily.parse(self.decision_base)

    def model_params(self) -> ModelParams:
        """Hyperparameters for the trainers."""
        return ModelParams(
            n_trees=self.n_trees,
            max_depth=self.max_depth,
            min_samples_leaf=self.min_samples_leaf,
            svm_c=self.svm_c,
            svm_epochs=self.svm_epochs,
            gb_stages=self.gb_stages,
            gb_eta=self.gb_eta,
            gb_depth=self.gb_depth,
            seed=self.seed,
            n_jobs=self.n_jobs,
        )

    def kalman_config(self) -> KalmanConfig:
        """Stacked three-sensor filter with the configured noise scales."""
        return KalmanConfig.stacked(self.q_scale, self.r_scale, self.initial_covariance)

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Copy with every non-None override applied."""
        changes = {key: value for key, value in overrides.items() if value is not None}
        unknown = set(changes) - {f.name for f in dataclasses.fields(self)}
        if unknown:
            raise ConfigurationError(f"Unknown configuration keys: {', '.join(sorted(unknown))}")
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict:
        """Convert to dictionary."""
        data = dataclasses.asdict(self)
        data["adapter"] = None if self.adapter is None else self.adapter.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "RunConfig":
        """Create from dictionary.

        Raises:
            ConfigurationError: On unknown keys or values of the wrong type
        """
        if not isinstance(data, dict):
            raise ConfigurationError("Run configuration must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"Unknown configuration keys: {', '.join(sorted(unknown))}")
        try:
            return cls(**data)
        except (TypeError, ValueError, AttributeError) as e:
            raise ConfigurationError(f"Invalid run configuration: {e}")

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        """Read a JSON configuration file.

        Raises:
            IngestionError: If the file cannot be read
            ConfigurationError: If it is not valid JSON or not a valid configuration
        """
        return cls.from_dict(load_json(path, "configuration"))

    def save(self, path: str | Path) -> Path:
        """Write the configuration as JSON."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")
        return path


def load_json(path: str | Path, what: str) -> Any:
    """Read a JSON file, reporting decode errors with line and column.

    Raises:
        IngestionError: If the file cannot be read
        ConfigurationError: If the content is not valid JSON
    """
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"File not found: {path}")
    try:
        content = path.read_text(encoding="utf-8")
    except OSError as e:
        raise IngestionError(f"Failed to read file {path}: {e}")
    try:
        return json.loads(content)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"Invalid {what} file {path}: line {e.lineno}, column {e.colno}: {e.msg}")


def load_adapter(path: str | Path) -> AdapterConfig:
    """Read a secondary-dataset adapter file."""
    data = load_json(path, "adapter")
    if not isinstance(data, dict) or not isinstance(data.get("channels"), dict):
        raise ConfigurationError(f"Adapter file {path} needs a 'channels' object")
    return AdapterConfig.from_dict(data)
