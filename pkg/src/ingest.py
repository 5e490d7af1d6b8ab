"""CSV ingestion, timestamp synchronization and synthetic data generation."""

import io
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.core import (
    FEATURE_NAMES,
    KALMAN_COLUMNS,
    LABEL_COLUMN,
    PRIMARY_ACTIVITIES,
    SENSOR_ORDER,
    TIMESTAMP_COLUMN,
    ActivityLabel,
    Dataset,
    SensorKind,
    check_seed,
    encode_labels,
)
from src.errors import ArgumentError, EmptyJoinError, IngestionError, ParseError, SchemaError

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE_MS = 50

_UNIT_SUFFIX = re.compile(r"\s*[\(\[].*?[\)\]]\s*$")
_NON_FINITE_TEXT = {"nan", "inf", "+inf", "-inf", "infinity", "+infinity", "-infinity"}


def normalize_header(name: str) -> str:
    """Lower-case a column name and strip its unit suffix.

    "Angular velocity X (°/s)" and "angular velocity x" both become
    "angular velocity x".
    """
    text = _UNIT_SUFFIX.sub("", str(name).strip())
    return " ".join(text.lower().split())


_CHANNEL_KEYS: Dict[str, int] = {normalize_header(n): i for i, n in enumerate(FEATURE_NAMES)}
_KALMAN_KEYS: Dict[str, int] = {normalize_header(n): i for i, n in enumerate(KALMAN_COLUMNS)}
_TIMESTAMP_KEYS = {"timestamp", "time"}
_LABEL_KEYS = {"label", "activity"}


@dataclass(frozen=True, eq=False)
class RawSensorStream:
    """Samples of one sensor before synchronization."""

    kind: SensorKind
    timestamps: np.ndarray
    values: np.ndarray
    labels: Optional[Tuple[str, ...]] = None
    dropped_rows: int = 0

    def __post_init__(self):
        n = self.timestamps.shape[0]
        if self.values.shape != (n, 3):
            raise IngestionError(f"Expected {n} x 3 {self.kind.value} values, got {self.values.shape}")
        if self.labels is not None and len(self.labels) != n:
            raise IngestionError(f"Expected {n} {self.kind.value} labels, got {len(self.labels)}")
        if n > 1 and np.any(np.diff(self.timestamps) < 0):
            raise IngestionError(f"{self.kind.value.capitalize()} stream timestamps must be non-decreasing")

    def __len__(self) -> int:
        return int(self.timestamps.shape[0])


@dataclass
class AdapterConfig:
    """Column mapping for the secondary (public) dataset layout.

    ``channels`` maps a source column name to one of the nine canonical
    channel names (unit suffixes and letter case are ignored).
    """

    channels: Dict[str, str]
    timestamp_column: str = "timestamp"
    label_column: str = "activity"

    def to_dict(self) -> Dict:
        """Convert to dictionary."""
        return {
            "timestamp_column": self.timestamp_column,
            "label_column": self.label_column,
            "channels": dict(self.channels),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "AdapterConfig":
        """Create from dictionary."""
        return cls(
            channels=dict(data.get("channels", {})),
            timestamp_column=data.get("timestamp_column", "timestamp"),
            label_column=data.get("label_column", "activity"),
        )


def _read_frame(data: bytes | str) -> pd.DataFrame:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8-sig")
        except UnicodeDecodeError as e:
            raise IngestionError(f"Input is not valid UTF-8: {e}")
    try:
        return pd.read_csv(io.StringIO(data), dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise IngestionError("Input CSV is empty")
    except pd.errors.ParserError as e:
        raise IngestionError(f"Malformed CSV: {e}")


def _parse_numeric(column: pd.Series, name: str) -> np.ndarray:
    """Convert a text column to floats; blanks and non-finite cells become NaN."""
    text = column.str.strip()
    blank = text == ""
    non_finite = text.str.lower().isin(_NON_FINITE_TEXT)
    coerced = pd.to_numeric(text.where(~blank & ~non_finite), errors="coerce")
    invalid = coerced.isna() & ~blank & ~non_finite
    if invalid.any():
        row = int(np.flatnonzero(invalid.to_numpy())[0])
        raise ParseError(f"Non-numeric value {text.iloc[row]!r}", line=row + 2, column=name)
    values = text.where(~blank & ~non_finite, "nan").astype(np.float64).to_numpy(copy=True)
    values[~np.isfinite(values)] = np.nan
    return values


def _parse_timestamps(column: pd.Series, name: str) -> np.ndarray:
    """Convert integer-millisecond or ISO-8601 timestamps to float milliseconds (NaN if blank)."""
    text = column.str.strip()
    blank = text == ""
    numeric = pd.to_numeric(text.where(~blank), errors="coerce")
    if not (numeric.isna() & ~blank).any():
        return np.trunc(numeric.to_numpy(dtype=np.float64))

    parsed = pd.to_datetime(text.where(~blank), utc=True, errors="coerce", format="ISO8601")
    invalid = parsed.isna() & ~blank
    if invalid.any():
        row = int(np.flatnonzero(invalid.to_numpy())[0])
        raise ParseError(f"Unreadable timestamp {text.iloc[row]!r}", line=row + 2, column=name)
    millis = (parsed - pd.Timestamp(0, tz="UTC")) // pd.Timedelta(milliseconds=1)
    return millis.to_numpy(dtype=np.float64, na_value=np.nan)


def _clean_rows(
    timestamps: np.ndarray, values: np.ndarray, labels: Optional[np.ndarray]
) -> Tuple[np.ndarray, np.ndarray, Optional[np.ndarray], int]:
    """Drop rows with a gap, then sort stably by timestamp."""
    keep = np.isfinite(timestamps) & np.all(np.isfinite(values), axis=1)
    if labels is not None:
        keep &= np.array([bool(str(label).strip()) for label in labels], dtype=bool)
    dropped = int(keep.shape[0] - np.count_nonzero(keep))

    ts = timestamps[keep].astype(np.int64)
    order = np.argsort(ts, kind="stable")
    cleaned_labels = None if labels is None else labels[keep][order]
    return ts[order], values[keep][order], cleaned_labels, dropped


def _build_dataset(
    timestamps: np.ndarray,
    channels: np.ndarray,
    names: np.ndarray,
    dropped: int,
    fixed_primary: bool,
    kalman: Optional[np.ndarray] = None,
) -> Dataset:
    if names.shape[0] == 0:
        return Dataset(timestamps, channels, [], [], kalman=kalman, dropped_rows=dropped)
    vocabulary, indices = encode_labels([str(n).strip() for n in names], fixed_primary=fixed_primary)
    return Dataset(timestamps, channels, indices, vocabulary, kalman=kalman, dropped_rows=dropped)


def _report_dropped(dropped: int, source: str) -> None:
    if dropped:
        logger.warning("Dropped %d row(s) with missing values from %s", dropped, source)


def parse_primary_csv(data: bytes | str, label: Optional[str] = None) -> Dataset | RawSensorStream:
    """Parse a primary-protocol CSV file.

    A file holding all nine channels plus a label column is returned as a
    Dataset. A file holding the three channels of one sensor is returned as a
    RawSensorStream tagged with the detected sensor.

    Args:
        data: UTF-8 CSV content
        label: Activity applied to every sample of a per-sensor file without a label column

    Returns:
        Dataset or RawSensorStream

    Raises:
        SchemaError: If the header layout is not recognised
        ParseError: If a cell is not numeric
    """
    frame = _read_frame(data)

    timestamp_col = label_col = None
    channel_cols: Dict[int, str] = {}
    kalman_cols: Dict[int, str] = {}
    for column in frame.columns:
        key = normalize_header(column)
        if key in _TIMESTAMP_KEYS and timestamp_col is None:
            timestamp_col = column
        elif key in _LABEL_KEYS and label_col is None:
            label_col = column
        elif key in _CHANNEL_KEYS and _CHANNEL_KEYS[key] not in channel_cols:
            channel_cols[_CHANNEL_KEYS[key]] = column
        elif key in _KALMAN_KEYS and _KALMAN_KEYS[key] not in kalman_cols:
            kalman_cols[_KALMAN_KEYS[key]] = column
        else:
            raise SchemaError(f"Unrecognised column {column!r}", column=str(column))

    if timestamp_col is None:
        raise SchemaError(f"Missing column {TIMESTAMP_COLUMN!r}", column=TIMESTAMP_COLUMN)

    timestamps = _parse_timestamps(frame[timestamp_col], timestamp_col)

    if len(channel_cols) == len(FEATURE_NAMES):
        if label_col is None:
            raise SchemaError(f"Missing column {LABEL_COLUMN!r}", column=LABEL_COLUMN)
        if kalman_cols and len(kalman_cols) != len(KALMAN_COLUMNS):
            missing = next(n for i, n in enumerate(KALMAN_COLUMNS) if i not in kalman_cols)
            raise SchemaError(f"Missing column {missing!r}", column=missing)

        columns = [channel_cols[i] for i in range(len(FEATURE_NAMES))]
        columns += [kalman_cols[i] for i in range(len(kalman_cols))]
        values = np.column_stack([_parse_numeric(frame[c], c) for c in columns])
        names = frame[label_col].to_numpy(dtype=object)
        ts, values, names, dropped = _clean_rows(timestamps, values, names)
        _report_dropped(dropped, "primary CSV")

        kalman = values[:, len(FEATURE_NAMES):] if kalman_cols else None
        return _build_dataset(ts, values[:, : len(FEATURE_NAMES)], names, dropped, True, kalman)

    for kind in SENSOR_ORDER:
        if set(channel_cols) == set(kind.columns):
            columns = [channel_cols[i] for i in kind.columns]
            values = np.column_stack([_parse_numeric(frame[c], c) for c in columns])
            names = None
            if label_col is not None:
                names = frame[label_col].to_numpy(dtype=object)
            elif label is not None:
                names = np.array([label] * len(frame), dtype=object)
            ts, values, names, dropped = _clean_rows(timestamps, values, names)
            _report_dropped(dropped, f"{kind.value} CSV")
            return RawSensorStream(
                kind=kind,
                timestamps=ts,
                values=values,
                labels=None if names is None else tuple(str(n).strip() for n in names),
                dropped_rows=dropped,
            )

    missing = next(n for i, n in enumerate(FEATURE_NAMES) if i not in channel_cols)
    raise SchemaError(f"Incomplete sensor layout, missing column {missing!r}", column=missing)


def _nearest_unused(
    candidates: np.ndarray, used: np.ndarray, t: int, tolerance_ms: int
) -> Optional[int]:
    """Index of the nearest unused candidate within tolerance; ties go to the earlier one."""
    pos = int(np.searchsorted(candidates, t, side="left"))
    left = pos - 1
    while left >= 0 and used[left] and t - candidates[left] <= tolerance_ms:
        left -= 1
    right = pos
    while right < candidates.shape[0] and used[right] and candidates[right] - t <= tolerance_ms:
        right += 1

    best = None
    if left >= 0 and not used[left] and t - candidates[left] <= tolerance_ms:
        best = left
    if right < candidates.shape[0] and not used[right] and candidates[right] - t <= tolerance_ms:
        if best is None or candidates[right] - t < t - candidates[best]:
            best = right
    return best


def synchronize(
    streams: Sequence[RawSensorStream], tolerance_ms: int = DEFAULT_TOLERANCE_MS
) -> Dataset:
    """Join per-sensor streams into one dataset by nearest timestamp.

    Every accelerometer sample, earliest first, claims the nearest unclaimed
    gyroscope and magnetometer samples within the tolerance. Rows lacking either
    match, or whose three timestamps are not pairwise within the tolerance, are
    dropped and counted.

    Args:
        streams: One stream per SensorKind
        tolerance_ms: Maximum timestamp distance for a match

    Returns:
        Synchronized Dataset labelled from the accelerometer stream

    Raises:
        ArgumentError: On duplicate or missing sensor kinds, or an empty stream
        SchemaError: If the accelerometer stream carries no labels
        EmptyJoinError: If no row could be joined
    """
    by_kind: Dict[SensorKind, RawSensorStream] = {}
    for stream in streams:
        if stream.kind in by_kind:
            raise ArgumentError(f"Duplicate {stream.kind.value} stream")
        by_kind[stream.kind] = stream
    for kind in SENSOR_ORDER:
        if kind not in by_kind:
            raise ArgumentError(f"Missing {kind.value} stream")
        if len(by_kind[kind]) == 0:
            raise ArgumentError(f"Empty {kind.value} stream")
    if tolerance_ms < 0:
        raise ArgumentError(f"Tolerance must be non-negative, got {tolerance_ms}")

    accel = by_kind[SensorKind.ACCELEROMETER]
    gyro = by_kind[SensorKind.GYROSCOPE]
    mag = by_kind[SensorKind.MAGNETOMETER]
    if accel.labels is None:
        raise SchemaError("Accelerometer stream has no activity labels", column=LABEL_COLUMN)

    gyro_used = np.zeros(len(gyro), dtype=bool)
    mag_used = np.zeros(len(mag), dtype=bool)
    rows: List[Tuple[int, int, int]] = []
    for i, t in enumerate(accel.timestamps.tolist()):
        g = _nearest_unused(gyro.timestamps, gyro_used, t, tolerance_ms)
        m = _nearest_unused(mag.timestamps, mag_used, t, tolerance_ms)
        if g is None or m is None:
            continue
        if abs(int(gyro.timestamps[g]) - int(mag.timestamps[m])) > tolerance_ms:
            continue
        gyro_used[g] = True
        mag_used[m] = True
        rows.append((i, g, m))

    dropped = len(accel) - len(rows)
    if not rows:
        raise EmptyJoinError(f"No rows could be joined within {tolerance_ms} ms")
    logger.info("Joined %d of %d accelerometer samples (%d dropped)", len(rows), len(accel), dropped)

    a_idx, g_idx, m_idx = (np.array(col, dtype=np.int64) for col in zip(*rows))
    channels = np.hstack([accel.values[a_idx], gyro.values[g_idx], mag.values[m_idx]])
    names = np.array([accel.labels[i] for i in a_idx], dtype=object)
    return _build_dataset(accel.timestamps[a_idx], channels, names, dropped, True)


def parse_secondary_csv(data: bytes | str, adapter_config: AdapterConfig) -> Dataset:
    """Parse the public secondary dataset through a column mapping.

    Labels are numbered by first appearance.

    Args:
        data: UTF-8 CSV content
        adapter_config: Source-column to channel mapping

    Returns:
        Cleaned Dataset

    Raises:
        SchemaError: If the mapping misses a channel or names an absent column
    """
    mapped: Dict[int, str] = {}
    for source, channel in adapter_config.channels.items():
        key = normalize_header(channel)
        if key not in _CHANNEL_KEYS:
            raise SchemaError(f"Adapter maps {source!r} to unknown channel {channel!r}", column=channel)
        mapped[_CHANNEL_KEYS[key]] = source
    for i, name in enumerate(FEATURE_NAMES):
        if i not in mapped:
            raise SchemaError(f"Adapter has no mapping for channel {name!r}", column=name)

    frame = _read_frame(data)
    required = [adapter_config.timestamp_column, adapter_config.label_column] + [
        mapped[i] for i in range(len(FEATURE_NAMES))
    ]
    for column in required:
        if column not in frame.columns:
            raise SchemaError(f"Missing column {column!r}", column=column)

    timestamps = _parse_timestamps(frame[adapter_config.timestamp_column], adapter_config.timestamp_column)
    values = np.column_stack(
        [_parse_numeric(frame[mapped[i]], mapped[i]) for i in range(len(FEATURE_NAMES))]
    )
    names = frame[adapter_config.label_column].to_numpy(dtype=object)
    ts, values, names, dropped = _clean_rows(timestamps, values, names)
    _report_dropped(dropped, "secondary CSV")
    return _build_dataset(ts, values, names, dropped, fixed_primary=False)


def _simplex_vertex(c: int) -> np.ndarray:
    """Class mean direction: unit axes, then the origin, then negated axes."""
    vertex = np.zeros(3)
    if c < 3:
        vertex[c] = 1.0
    elif c > 3:
        vertex[(c - 4) % 3] = -(1.0 + (c - 4) // 3)
    return vertex


@dataclass(frozen=True)
class SynthConfig:
    """Seeded per-class, per-sensor Gaussian cluster generator.

    ``means[c][s]`` is the 3-vector mean of sensor ``s`` (canonical channel order) for
    class ``c``; ``stddevs[c][s]`` is its isotropic standard deviation.
    """

    means: Tuple[Tuple[Tuple[float, float, float], ...], ...]
    stddevs: Tuple[Tuple[float, ...], ...]
    samples_per_class: int = 250
    seed: int = 7
    class_names: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        k = len(self.means)
        if k < 1:
            raise ArgumentError("SynthConfig needs at least one class")
        if np.asarray(self.means, dtype=float).shape != (k, 3, 3):
            raise ArgumentError("means must have shape K x 3 sensors x 3 axes")
        stddevs = np.asarray(self.stddevs, dtype=float)
        if stddevs.shape != (k, 3):
            raise ArgumentError("stddevs must have shape K x 3 sensors")
        if np.any(stddevs < 0):
            raise ArgumentError("stddev must be >= 0")
        if self.samples_per_class < 1:
            raise ArgumentError("samples_per_class must be >= 1")
        if self.class_names and len(self.class_names) != k:
            raise ArgumentError("class_names must name every class")
        check_seed(self.seed)

    @property
    def classes(self) -> int:
        """Number of classes K."""
        return len(self.means)

    def names(self) -> Tuple[str, ...]:
        """Class names, defaulting to the primary activities."""
        if self.class_names:
            return self.class_names
        return tuple(
            PRIMARY_ACTIVITIES[c] if c < len(PRIMARY_ACTIVITIES) else f"class_{c}"
            for c in range(self.classes)
        )

    @classmethod
    def simplex(
        cls,
        separations: Sequence[float],
        classes: int = 4,
        samples_per_class: int = 250,
        stddev: float = 1.0,
        seed: int = 7,
    ) -> "SynthConfig":
        """Place class means on simplex vertices, scaled per sensor.

        Args:
            separations: Distance scale for accelerometer, gyroscope, magnetometer
            classes: Number of classes K
            samples_per_class: Rows per class
            stddev: Isotropic noise for every class and sensor
            seed: 64-bit seed

        Returns:
            SynthConfig
        """
        if len(separations) != 3:
            raise ArgumentError("Need one separation per sensor")
        means = tuple(
            tuple(tuple(float(v) for v in sep * _simplex_vertex(c)) for sep in separations)
            for c in range(classes)
        )
        stddevs = tuple((float(stddev),) * 3 for _ in range(classes))
        return cls(means=means, stddevs=stddevs, samples_per_class=samples_per_class, seed=seed)

    @classmethod
    def separable(cls, seed: int = 7, samples_per_class: int = 250) -> "SynthConfig":
        """Four classes, every sensor separated by 10 standard deviations."""
        return cls.simplex((10.0, 10.0, 10.0), samples_per_class=samples_per_class, seed=seed)

    @classmethod
    def graded(cls, seed: int = 7, samples_per_class: int = 400) -> "SynthConfig":
        """Magnetometer most informative, accelerometer less, gyroscope near noise."""
        return cls.simplex((2.0, 0.1, 3.5), samples_per_class=samples_per_class, seed=seed)

    def to_dict(self) -> Dict:
        """Convert to dictionary."""
        return {
            "means": [[list(axis) for axis in cls_means] for cls_means in self.means],
            "stddevs": [list(s) for s in self.stddevs],
            "samples_per_class": self.samples_per_class,
            "seed": self.seed,
            "class_names": list(self.class_names),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "SynthConfig":
        """Create from dictionary."""
        return cls(
            means=tuple(tuple(tuple(axis) for axis in m) for m in data["means"]),
            stddevs=tuple(tuple(s) for s in data["stddevs"]),
            samples_per_class=int(data.get("samples_per_class", 250)),
            seed=int(data.get("seed", 7)),
            class_names=tuple(data.get("class_names", ())),
        )


def generate_synthetic(config: SynthConfig) -> Dataset:
    """Draw a class-blocked Gaussian dataset.

    Rows are grouped class by class (like separate recording sessions) and
    stamped with consecutive integer timestamps.
    """
    rng = np.random.default_rng(config.seed)
    means = np.asarray(config.means, dtype=np.float64).reshape(config.classes, 9)
    stddevs = np.repeat(np.asarray(config.stddevs, dtype=np.float64), 3, axis=1)

    n = config.samples_per_class
    blocks = [rng.normal(means[c], stddevs[c], size=(n, 9)) for c in range(config.classes)]
    labels = np.repeat(np.arange(config.classes), n)
    vocabulary = [ActivityLabel(name, c) for c, name in enumerate(config.names())]
    return Dataset(np.arange(n * config.classes), np.vstack(blocks), labels, vocabulary)


def dataset_to_frame(dataset: Dataset) -> pd.DataFrame:
    """Canonical table form: Timestamp, nine channels, label, optional Kalman columns."""
    frame = pd.DataFrame({TIMESTAMP_COLUMN: dataset.timestamps})
    for i, name in enumerate(FEATURE_NAMES):
        frame[name] = dataset.channels[:, i]
    frame[LABEL_COLUMN] = [dataset.decode(int(y)) for y in dataset.labels] if len(dataset) else []
    if dataset.kalman is not None:
        for i, name in enumerate(KALMAN_COLUMNS):
            frame[name] = dataset.kalman[:, i]
    return frame


def canonical_csv(dataset: Dataset) -> str:
    """Serialize a dataset to canonical CSV text."""
    return dataset_to_frame(dataset).to_csv(index=False, lineterminator="\n")


def read_input(path: str | Path) -> bytes:
    """Read an input file.

    Raises:
        IngestionError: If the file is missing or unreadable
    """
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"File not found: {path}")
    try:
        return path.read_bytes()
    except OSError as e:
        raise IngestionError(f"Failed to read file {path}: {e}")


def load_primary(paths: Sequence[str | Path], tolerance_ms: int = DEFAULT_TOLERANCE_MS) -> Dataset:
    """Load one pre-synchronized file, or synchronize one file per sensor.

    Raises:
        IngestionError: If the inputs do not form a complete dataset
    """
    parsed = [parse_primary_csv(read_input(p)) for p in paths]
    if len(parsed) == 1 and isinstance(parsed[0], Dataset):
        return parsed[0]
    streams = [p for p in parsed if isinstance(p, RawSensorStream)]
    if len(streams) != len(parsed):
        raise SchemaError("Cannot mix pre-synchronized and per-sensor files")
    if len(streams) != 3:
        raise SchemaError(f"Per-sensor input needs three files, got {len(streams)}")
    try:
        return synchronize(streams, tolerance_ms)
    except ArgumentError as e:
        raise SchemaError(str(e))
