"""Unit tests for core domain types."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.core import (
    FEATURE_NAMES,
    SENSOR_ORDER,
    ActivityLabel,
    Dataset,
    SensorKind,
    SyncRecord,
    decode_labels,
    encode_labels,
    train_test_split,
)
from src.errors import ArgumentError, IngestionError


def _dataset(n=4, labels=None):
    vocabulary = [ActivityLabel("walking", 0), ActivityLabel("sitting", 2)]
    return Dataset(
        np.arange(n),
        np.arange(n * 9, dtype=float).reshape(n, 9),
        labels if labels is not None else [0, 2] * (n // 2),
        vocabulary,
    )


class TestSensorKind:
    """Test sensor enumeration and column mapping."""

    def test_three_sensors_in_table_order(self):
        """Test that the order is accelerometer, gyroscope, magnetometer."""
        assert SENSOR_ORDER == (SensorKind.ACCELEROMETER, SensorKind.GYROSCOPE, SensorKind.MAGNETOMETER)

    def test_contiguous_column_triples(self):
        """Test that each sensor owns a fixed contiguous triple."""
        assert SensorKind.ACCELEROMETER.columns == (0, 1, 2)
        assert SensorKind.GYROSCOPE.columns == (3, 4, 5)
        assert SensorKind.MAGNETOMETER.columns == (6, 7, 8)

    def test_parse_short_and_full_names(self):
        """Test resolving sensors from names."""
        assert SensorKind.parse("mag") is SensorKind.MAGNETOMETER
        assert SensorKind.parse("Gyroscope") is SensorKind.GYROSCOPE

    def test_parse_unknown(self):
        """Test that an unknown sensor name is rejected."""
        with pytest.raises(ArgumentError):
            SensorKind.parse("barometer")


class TestEncodeLabels:
    """Test activity label encoding."""

    def test_fixed_primary_encoding(self):
        """Test walking=0 and sitting=2 keep their fixed indices."""
        vocabulary, indices = encode_labels(["walking", "sitting", "walking"])
        assert vocabulary == [ActivityLabel("walking", 0), ActivityLabel("sitting", 2)]
        assert indices == [0, 2, 0]

    def test_single_primary_class(self):
        """Test a lone primary class keeps its fixed index."""
        vocabulary, indices = encode_labels(["lying"])
        assert vocabulary == [ActivityLabel("lying", 3)]
        assert indices == [3]

    def test_secondary_first_appearance(self):
        """Test unknown names are numbered by first appearance."""
        vocabulary, indices = encode_labels(["running", "standing"])
        assert [label.name for label in vocabulary] == ["running", "standing"]
        assert indices == [0, 1]

    def test_unknown_after_primary(self):
        """Test unknown names follow the highest primary index present."""
        vocabulary, indices = encode_labels(["working", "running"])
        assert indices == [1, 2]

    def test_first_appearance_without_fixed_encoding(self):
        """Test turning off the fixed primary encoding."""
        _, indices = encode_labels(["sitting", "walking"], fixed_primary=False)
        assert indices == [0, 1]

    def test_empty_name(self):
        """Test that a blank label is an ingestion error."""
        with pytest.raises(IngestionError):
            encode_labels(["walking", "  "])

    def test_empty_list(self):
        """Test that an empty label list is an ingestion error."""
        with pytest.raises(IngestionError):
            encode_labels([])

    @given(st.lists(st.sampled_from(["walking", "working", "sitting", "lying", "running", "jumping"]), min_size=1))
    def test_decode_round_trip(self, names):
        """Test decode(encode(name)) == name for every row."""
        vocabulary, indices = encode_labels(names)
        assert decode_labels(vocabulary, indices) == names


class TestDataset:
    """Test dataset construction and invariants."""

    def test_basic_properties(self):
        """Test sizes, names and K."""
        dataset = _dataset()
        assert len(dataset) == 4
        assert dataset.feature_names == FEATURE_NAMES
        assert dataset.num_classes == 3
        assert dataset.class_names() == ["walking", "class_1", "sitting"]

    def test_rejects_non_finite(self):
        """Test that a NaN channel value is rejected."""
        channels = np.zeros((2, 9))
        channels[1, 4] = np.nan
        with pytest.raises(IngestionError):
            Dataset([0, 1], channels, [0, 0], [ActivityLabel("walking", 0)])

    def test_rejects_infinite(self):
        """Test that an infinite channel value is rejected."""
        channels = np.zeros((2, 9))
        channels[0, 0] = np.inf
        with pytest.raises(IngestionError):
            Dataset([0, 1], channels, [0, 0], [ActivityLabel("walking", 0)])

    def test_rejects_unsorted_timestamps(self):
        """Test that rows must be in timestamp order."""
        with pytest.raises(IngestionError):
            Dataset([5, 1], np.zeros((2, 9)), [0, 0], [ActivityLabel("walking", 0)])

    def test_rejects_label_outside_vocabulary(self):
        """Test that every label must be in the vocabulary."""
        with pytest.raises(IngestionError):
            Dataset([0, 1], np.zeros((2, 9)), [0, 1], [ActivityLabel("walking", 0)])

    def test_arrays_are_read_only(self):
        """Test that the dataset cannot be mutated in place."""
        dataset = _dataset()
        with pytest.raises(ValueError):
            dataset.channels[0, 0] = 1.0

    def test_from_records_and_rows(self):
        """Test building from SyncRecord rows and materialising them back."""
        walking = ActivityLabel("walking", 0)
        records = [
            SyncRecord(0, (1.0, 2.0, 3.0), (4.0, 5.0, 6.0), (7.0, 8.0, 9.0), walking),
            SyncRecord(10, (0.0, 0.0, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 1.0), walking),
        ]
        dataset = Dataset.from_records(records)
        assert dataset.rows == records
        assert dataset.channels[0].tolist() == [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]

    def test_sensor_channels(self):
        """Test extracting one sensor block."""
        dataset = _dataset()
        assert dataset.sensor_channels(SensorKind.GYROSCOPE).tolist()[0] == [3.0, 4.0, 5.0]

    def test_subset_keeps_timestamp_order(self):
        """Test that subsets are re-sorted by row position."""
        dataset = _dataset()
        subset = dataset.subset([3, 1])
        assert subset.timestamps.tolist() == [1, 3]

    def test_decode_unknown_index(self):
        """Test decoding an index outside the vocabulary."""
        with pytest.raises(ArgumentError):
            _dataset().decode(1)


class TestTrainTestSplit:
    """Test the seeded train/test split."""

    def test_ten_rows(self):
        """Test N=10 at 0.8 gives 8/2."""
        split = train_test_split(range(10), 0.8, 7)
        assert len(split.train_indices) == 8
        assert len(split.test_indices) == 2

    def test_large_sample_count(self):
        """Test N=3239 at 0.8 gives 2591/648."""
        split = train_test_split(range(3239), 0.8, 7)
        assert len(split.train_indices) == 2591
        assert len(split.test_indices) == 648

    def test_deterministic(self):
        """Test identical inputs give identical index lists."""
        dataset = _dataset(10)
        a = train_test_split(dataset, 0.8, 123)
        b = train_test_split(dataset, 0.8, 123)
        assert a.train_indices.tolist() == b.train_indices.tolist()
        assert a.test_indices.tolist() == b.test_indices.tolist()

    @pytest.mark.parametrize("n, ratio", [(1, 0.5), (10, 0.0), (10, 1.0), (10, -0.2)])
    def test_invalid_arguments(self, n, ratio):
        """Test N < 2 or ratio outside (0, 1) is an argument error."""
        with pytest.raises(ArgumentError):
            train_test_split(range(n), ratio, 7)

    def test_seed_out_of_range(self):
        """Test that seeds must fit in 64 bits."""
        with pytest.raises(ArgumentError):
            train_test_split(range(10), 0.8, 2**64)

    @settings(max_examples=1000, deadline=None)
    @given(
        n=st.integers(min_value=2, max_value=300),
        ratio=st.floats(min_value=0.01, max_value=0.99),
        seed=st.integers(min_value=0, max_value=2**64 - 1),
    )
    def test_partition_property(self, n, ratio, seed):
        """Test train and test partition all indices with |train| = floor(N * ratio)."""
        split = train_test_split(range(n), ratio, seed)
        train, test = split.train_indices.tolist(), split.test_indices.tolist()
        assert sorted(train + test) == list(range(n))
        assert not set(train) & set(test)
        assert len(train) == int(n * ratio)

    def test_to_dict(self):
        """Test the summary dictionary."""
        split = train_test_split(range(10), 0.8, 7)
        assert split.to_dict() == {"seed": 7, "ratio": 0.8, "n_train": 8, "n_test": 2}
