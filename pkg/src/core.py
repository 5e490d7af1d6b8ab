"""Domain types shared by every fusionhar module."""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Sized, Tuple

import numpy as np

from src.errors import ArgumentError, IngestionError

TIMESTAMP_COLUMN = "Timestamp"
LABEL_COLUMN = "label"

# Canonical channel order; a fused row is always laid out like this.
FEATURE_NAMES: Tuple[str, ...] = (
    "Acceleration X (g)",
    "Acceleration Y (g)",
    "Acceleration Z (g)",
    "Angular velocity X (°/s)",
    "Angular velocity Y (°/s)",
    "Angular velocity Z (°/s)",
    "Magnetic field X (Bx)",
    "Magnetic field Y (By)",
    "Magnetic field Z (Bz)",
)

KALMAN_COLUMNS: Tuple[str, ...] = (
    "Kalman Filtered X",
    "Kalman Filtered Y",
    "Kalman Filtered Z",
)

PRIMARY_ACTIVITIES: Tuple[str, ...] = ("walking", "working", "sitting", "lying")

MAX_SEED = 2**64


class SensorKind(Enum):
    """The three sensor types; each owns a contiguous column triple."""

    ACCELEROMETER = "accelerometer"
    GYROSCOPE = "gyroscope"
    MAGNETOMETER = "magnetometer"

    @property
    def position(self) -> int:
        """Position of the sensor in canonical channel order."""
        return SENSOR_ORDER.index(self)

    @property
    def columns(self) -> Tuple[int, int, int]:
        """Column indices of this sensor's X/Y/Z channels in a fused row."""
        start = 3 * self.position
        return (start, start + 1, start + 2)

    @property
    def short_name(self) -> str:
        """Three-letter name used in file names and reports."""
        return {"accelerometer": "acc", "gyroscope": "gyr", "magnetometer": "mag"}[self.value]

    @classmethod
    def parse(cls, name: str) -> "SensorKind":
        """Resolve a sensor from its full or short name.

        Args:
            name: e.g. "magnetometer", "mag", "Gyroscope"

        Returns:
            Matching SensorKind

        Raises:
            ArgumentError: If the name is not a known sensor
        """
        key = name.strip().lower()
        for kind in cls:
            if key in (kind.value, kind.short_name):
                return kind
        raise ArgumentError(f"Unknown sensor: {name!r}")


SENSOR_ORDER: Tuple[SensorKind, ...] = (
    SensorKind.ACCELEROMETER,
    SensorKind.GYROSCOPE,
    SensorKind.MAGNETOMETER,
)


@dataclass(frozen=True)
class ActivityLabel:
    """A named activity class with its integer encoding."""

    name: str
    index: int


@dataclass(frozen=True)
class SyncRecord:
    """One timestamp-aligned row of nine sensor channels plus its activity."""

    timestamp: int
    accel: Tuple[float, float, float]
    gyro: Tuple[float, float, float]
    mag: Tuple[float, float, float]
    label: ActivityLabel

    @property
    def channels(self) -> Tuple[float, ...]:
        """All nine channel values in canonical channel order."""
        return self.accel + self.gyro + self.mag


def _read_only(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


class Dataset:
    """Immutable tabular corpus of synchronized sensor rows.

    Rows are held column-wise: integer millisecond timestamps, an N x 9 channel
    matrix in canonical channel order and integer label indices. A Kalman-filtered dataset
    additionally carries an N x 3 matrix of filtered X/Y/Z values.
    """

    def __init__(
        self,
        timestamps: Sequence[int] | np.ndarray,
        channels: Sequence[Sequence[float]] | np.ndarray,
        labels: Sequence[int] | np.ndarray,
        label_vocabulary: Iterable[ActivityLabel],
        kalman: Optional[np.ndarray] = None,
        dropped_rows: int = 0,
    ):
        """Build and validate a dataset.

        Args:
            timestamps: N millisecond timestamps, non-decreasing
            channels: N x 9 channel matrix in canonical channel order
            labels: N label indices
            label_vocabulary: Labels that may appear in this dataset
            kalman: Optional N x 3 Kalman-filtered columns
            dropped_rows: Number of input rows removed while cleaning

        Raises:
            IngestionError: If any invariant is violated
        """
        ts = np.asarray(timestamps, dtype=np.int64).reshape(-1)
        n = ts.shape[0]
        values = np.asarray(channels, dtype=np.float64)
        if n == 0:
            values = values.reshape(0, len(FEATURE_NAMES))
        y = np.asarray(labels, dtype=np.int64).reshape(-1)

        if values.shape != (n, len(FEATURE_NAMES)):
            raise IngestionError(f"Expected {n} x 9 channel matrix, got {values.shape}")
        if y.shape[0] != n:
            raise IngestionError(f"Expected {n} labels, got {y.shape[0]}")
        if n > 1 and np.any(np.diff(ts) < 0):
            raise IngestionError("Rows must be sorted by non-decreasing timestamp")
        if not np.all(np.isfinite(values)):
            bad = int(np.argwhere(~np.isfinite(values))[0][0])
            raise IngestionError(f"Row {bad} contains a non-finite channel value")

        vocabulary = tuple(sorted(label_vocabulary, key=lambda label: label.index))
        names = [label.name for label in vocabulary]
        indices = [label.index for label in vocabulary]
        if len(set(names)) != len(names) or len(set(indices)) != len(indices):
            raise IngestionError("Label names and indices must be unique")
        if any(index < 0 for index in indices):
            raise IngestionError("Label indices must be non-negative")
        unknown = set(np.unique(y).tolist()) - set(indices)
        if unknown:
            raise IngestionError(f"Label indices {sorted(unknown)} are not in the vocabulary")

        if kalman is not None:
            kalman = np.asarray(kalman, dtype=np.float64)
            if kalman.shape != (n, len(KALMAN_COLUMNS)):
                raise IngestionError(f"Expected {n} x 3 Kalman columns, got {kalman.shape}")
            kalman = _read_only(kalman)

        self._timestamps = _read_only(ts)
        self._channels = _read_only(values)
        self._labels = _read_only(y)
        self._vocabulary = vocabulary
        self._kalman = kalman
        self.dropped_rows = int(dropped_rows)

    @classmethod
    def from_records(
        cls,
        records: Sequence[SyncRecord],
        label_vocabulary: Optional[Iterable[ActivityLabel]] = None,
    ) -> "Dataset":
        """Build a dataset from SyncRecord rows.

        Args:
            records: Rows in timestamp order
            label_vocabulary: Vocabulary (defaults to the labels seen in the rows)

        Returns:
            Dataset holding the records
        """
        if label_vocabulary is None:
            label_vocabulary = {record.label for record in records}
        return cls(
            [record.timestamp for record in records],
            [record.channels for record in records],
            [record.label.index for record in records],
            label_vocabulary,
        )

    def __len__(self) -> int:
        return int(self._timestamps.shape[0])

    @property
    def timestamps(self) -> np.ndarray:
        """Millisecond timestamps (read-only)."""
        return self._timestamps

    @property
    def channels(self) -> np.ndarray:
        """N x 9 channel matrix (read-only)."""
        return self._channels

    @property
    def labels(self) -> np.ndarray:
        """Label index per row (read-only)."""
        return self._labels

    @property
    def kalman(self) -> Optional[np.ndarray]:
        """N x 3 Kalman-filtered columns, or None."""
        return self._kalman

    @property
    def label_vocabulary(self) -> Tuple[ActivityLabel, ...]:
        """Vocabulary ordered by label index."""
        return self._vocabulary

    @property
    def feature_names(self) -> Tuple[str, ...]:
        return FEATURE_NAMES

    @property
    def num_classes(self) -> int:
        """K: one more than the largest label index in the vocabulary."""
        if not self._vocabulary:
            return 0
        return self._vocabulary[-1].index + 1

    @property
    def rows(self) -> List[SyncRecord]:
        """Materialise the rows as SyncRecord values."""
        by_index = {label.index: label for label in self._vocabulary}
        records = []
        for ts, row, y in zip(self._timestamps, self._channels, self._labels):
            values = tuple(float(v) for v in row)
            records.append(
                SyncRecord(int(ts), values[0:3], values[3:6], values[6:9], by_index[int(y)])
            )
        return records

    def class_names(self) -> List[str]:
        """Names for class indices 0..K-1; unused indices get a placeholder."""
        by_index = {label.index: label.name for label in self._vocabulary}
        return [by_index.get(i, f"class_{i}") for i in range(self.num_classes)]

    def decode(self, index: int) -> str:
        """Return the label name of a class index."""
        for label in self._vocabulary:
            if label.index == index:
                return label.name
        raise ArgumentError(f"Class index {index} is not in the vocabulary")

    def sensor_channels(self, kind: SensorKind) -> np.ndarray:
        """Return the N x 3 block of one sensor."""
        start = kind.columns[0]
        return self._channels[:, start : start + 3]

    def with_kalman(self, filtered: np.ndarray) -> "Dataset":
        """Return a copy carrying Kalman-filtered columns."""
        return Dataset(
            self._timestamps,
            self._channels,
            self._labels,
            self._vocabulary,
            kalman=filtered,
            dropped_rows=self.dropped_rows,
        )

    def subset(self, indices: Sequence[int] | np.ndarray) -> "Dataset":
        """Return the rows at the given indices, kept in timestamp order."""
        order = np.sort(np.asarray(indices, dtype=np.int64))
        return Dataset(
            self._timestamps[order],
            self._channels[order],
            self._labels[order],
            self._vocabulary,
            kalman=None if self._kalman is None else self._kalman[order],
        )


@dataclass(frozen=True, eq=False)
class TrainTestSplit:
    """Disjoint train/test row indices produced by a seeded shuffle."""

    train_indices: np.ndarray
    test_indices: np.ndarray
    seed: int
    ratio: float

    def to_dict(self) -> Dict:
        """Convert to a JSON-friendly dictionary."""
        return {
            "seed": self.seed,
            "ratio": self.ratio,
            "n_train": int(self.train_indices.shape[0]),
            "n_test": int(self.test_indices.shape[0]),
        }


def encode_labels(
    raw_names: Sequence[str], fixed_primary: bool = True
) -> Tuple[List[ActivityLabel], List[int]]:
    """Encode activity names as class indices.

    Primary activity names keep their fixed encoding (walking=0, working=1,
    sitting=2, lying=3). Any other name gets the next index after the highest
    primary index present, in first-appearance order. With ``fixed_primary``
    off every name is numbered by first appearance.

    Args:
        raw_names: Activity name per row
        fixed_primary: Whether to apply the fixed primary encoding

    Returns:
        Tuple of (vocabulary ordered by index, index per row)

    Raises:
        IngestionError: If the list is empty or a name is blank
    """
    if len(raw_names) == 0:
        raise IngestionError("No activity labels to encode")

    names = []
    for row, raw in enumerate(raw_names):
        name = str(raw).strip()
        if not name:
            raise IngestionError(f"Empty activity label in row {row}")
        names.append(name)

    mapping: Dict[str, int] = {}
    next_index = 0
    if fixed_primary:
        present = [PRIMARY_ACTIVITIES.index(n.lower()) for n in set(names) if n.lower() in PRIMARY_ACTIVITIES]
        next_index = max(present) + 1 if present else 0

    for name in names:
        if name in mapping:
            continue
        if fixed_primary and name.lower() in PRIMARY_ACTIVITIES:
            mapping[name] = PRIMARY_ACTIVITIES.index(name.lower())
        else:
            mapping[name] = next_index
            next_index += 1

    vocabulary = sorted(
        (ActivityLabel(name, index) for name, index in mapping.items()), key=lambda label: label.index
    )
    if len({label.index for label in vocabulary}) != len(vocabulary):
        raise IngestionError("Activity names differ only in letter case")
    return vocabulary, [mapping[name] for name in names]


def decode_labels(vocabulary: Iterable[ActivityLabel], indices: Iterable[int]) -> List[str]:
    """Map class indices back to activity names."""
    by_index = {label.index: label.name for label in vocabulary}
    try:
        return [by_index[int(i)] for i in indices]
    except KeyError as e:
        raise ArgumentError(f"Class index {e.args[0]} is not in the vocabulary")


def check_seed(seed: int) -> int:
    """Validate a 64-bit seed."""
    if not 0 <= int(seed) < MAX_SEED:
        raise ArgumentError(f"Seed must be in [0, 2**64), got {seed}")
    return int(seed)


def train_test_split(dataset: Sized, ratio: float, seed: int) -> TrainTestSplit:
    """Shuffle row indices with a seeded RNG and cut them into train and test.

    Args:
        dataset: Dataset (or any sized row collection) to split
        ratio: Training fraction in (0, 1)
        seed: 64-bit seed

    Returns:
        TrainTestSplit with |train| = floor(N * ratio)

    Raises:
        ArgumentError: If N < 2 or ratio is outside (0, 1)
    """
    n = len(dataset)
    if n < 2:
        raise ArgumentError(f"Need at least 2 rows to split, got {n}")
    if not 0.0 < ratio < 1.0:
        raise ArgumentError(f"Split ratio must be in (0, 1), got {ratio}")
    seed = check_seed(seed)

    order = np.random.default_rng(seed).permutation(n)
    n_train = math.floor(n * ratio)
    return TrainTestSplit(
        train_indices=_read_only(order[:n_train]),
        test_indices=_read_only(order[n_train:]),
        seed=seed,
        ratio=float(ratio),
    )
