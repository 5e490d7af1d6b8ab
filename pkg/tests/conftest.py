"""Shared fixtures for the fusionhar test suite."""

import tempfile
from pathlib import Path

import pytest

from src.core import FEATURE_NAMES, LABEL_COLUMN, TIMESTAMP_COLUMN
from src.ingest import SynthConfig, generate_synthetic

CANONICAL_HEADER = ",".join((TIMESTAMP_COLUMN,) + FEATURE_NAMES + (LABEL_COLUMN,))


def canonical_rows(rows):
    """CSV text from (timestamp, nine values, label) tuples under the canonical header."""
    lines = [CANONICAL_HEADER]
    for timestamp, values, label in rows:
        lines.append(",".join([str(timestamp)] + [str(v) for v in values] + [label]))
    return "\n".join(lines) + "\n"


def sensor_rows(headers, rows):
    """CSV text for a per-sensor file: Timestamp, three channels and optional label."""
    lines = [",".join(headers)]
    for row in rows:
        lines.append(",".join(str(v) for v in row))
    return "\n".join(lines) + "\n"


@pytest.fixture
def temp_dir():
    """Create a temporary directory for test files."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture(scope="session")
def separable_dataset():
    """Four classes, every sensor 10 standard deviations apart."""
    return generate_synthetic(SynthConfig.separable(seed=7))


@pytest.fixture(scope="session")
def graded_dataset():
    """Magnetometer > accelerometer > gyroscope separability."""
    return generate_synthetic(SynthConfig.graded(seed=7))


@pytest.fixture
def five_row_csv():
    """Canonical CSV with five valid rows."""
    rows = [
        (1000 + 10 * i, [0.1 * i, 0.2, 0.3, 1.0, 2.0, 3.0, 40.0, 41.0, 42.0], label)
        for i, label in enumerate(["walking", "working", "sitting", "lying", "walking"])
    ]
    return canonical_rows(rows)
