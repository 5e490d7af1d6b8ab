"""Unit tests for feature fusion and the Kalman filter."""

import numpy as np
import pytest

from src.core import ActivityLabel, Dataset, SensorKind
from src.errors import ArgumentError, ConfigurationError, IngestionError, NumericalError
from src.fusion import (
    KalmanConfig,
    KalmanState,
    feature_fuse,
    kalman_filter_dataset,
    kalman_gain,
    kalman_predict,
    kalman_update,
)

WALKING = ActivityLabel("walking", 0)


def _dataset(channels):
    channels = np.asarray(channels, dtype=float)
    n = channels.shape[0]
    return Dataset(np.arange(n), channels, [0] * n, [WALKING])


class TestFeatureFuse:
    """Test feature-level concatenation."""

    def test_all_sensors(self, separable_dataset):
        """Test all three sensors give width 9 in canonical channel order."""
        view = feature_fuse(separable_dataset, set(SensorKind))
        assert view.shape == (1000, 9)
        assert view.columns == tuple(range(9))
        assert np.array_equal(view.matrix, separable_dataset.channels)

    def test_gyroscope_only(self, separable_dataset):
        """Test a single sensor selects columns 3-5."""
        view = feature_fuse(separable_dataset, {SensorKind.GYROSCOPE})
        assert view.columns == (3, 4, 5)
        assert view.column_names[0].startswith("Angular velocity X")

    def test_selection_order_normalised(self, separable_dataset):
        """Test magnetometer + accelerometer gives width 6 without gyro columns."""
        view = feature_fuse(separable_dataset, [SensorKind.MAGNETOMETER, SensorKind.ACCELEROMETER])
        assert view.columns == (0, 1, 2, 6, 7, 8)

    def test_empty_selection(self, separable_dataset):
        """Test an empty sensor set is an argument error."""
        with pytest.raises(ArgumentError):
            feature_fuse(separable_dataset, set())


class TestKalmanConfig:
    """Test filter configuration validation."""

    def test_stacked_defaults(self):
        """Test the stacked model shapes and noise scales."""
        config = KalmanConfig.stacked()
        assert config.H.shape == (9, 3)
        assert np.array_equal(config.Q, 0.1 * np.eye(3))
        assert np.array_equal(config.R, 0.5 * np.eye(9))

    def test_rejects_non_psd_noise(self):
        """Test a negative-definite Q is rejected."""
        with pytest.raises(ConfigurationError):
            KalmanConfig.identity(q_scale=-1.0)

    def test_rejects_wrong_shape(self):
        """Test R must match the rows of H."""
        config = KalmanConfig.identity()
        with pytest.raises(ConfigurationError):
            KalmanConfig(F=config.F, B=config.B, u=config.u, H=config.H, Q=config.Q, R=np.eye(2))


class TestKalmanPredict:
    """Test the predict step."""

    def test_adds_process_noise(self):
        """Test x unchanged and P = I + 0.1 I."""
        state = kalman_predict(KalmanState([1.0, 2.0, 3.0], np.eye(3)), KalmanConfig.identity())
        assert state.x_hat.tolist() == [1.0, 2.0, 3.0]
        assert np.allclose(state.P, 1.1 * np.eye(3), atol=1e-15)

    def test_zero_process_noise(self):
        """Test Q = 0 leaves the state unchanged."""
        before = KalmanState([1.0, -1.0, 0.5], 2.0 * np.eye(3))
        after = kalman_predict(before, KalmanConfig.identity(q_scale=0.0))
        assert np.array_equal(after.x_hat, before.x_hat)
        assert np.array_equal(after.P, before.P)

    def test_from_zero_covariance(self):
        """Test P = 0 becomes 0.1 I."""
        state = kalman_predict(KalmanState(np.zeros(3), np.zeros((3, 3))), KalmanConfig.identity())
        assert np.allclose(state.P, 0.1 * np.eye(3), atol=1e-15)

    def test_dimension_mismatch(self):
        """Test a wrongly sized state is a configuration error."""
        with pytest.raises(ConfigurationError):
            kalman_predict(KalmanState(np.zeros(2), np.eye(2)), KalmanConfig.identity())


class TestKalmanUpdate:
    """Test the update step."""

    def test_arithmetic_oracle(self):
        """Test one predict + update from x=0, P=I with z=(1,1,1)."""
        config = KalmanConfig.identity(q_scale=0.1, r_scale=0.5)
        predicted = kalman_predict(KalmanState(np.zeros(3), np.eye(3)), config)
        gain = kalman_gain(predicted, config)
        posterior = kalman_update(predicted, np.ones(3), config)
        assert np.allclose(gain, 0.6875 * np.eye(3), atol=1e-12, rtol=0)
        assert np.allclose(posterior.x_hat, [0.6875] * 3, atol=1e-12, rtol=0)
        assert np.allclose(posterior.P, 0.34375 * np.eye(3), atol=1e-12, rtol=0)

    def test_zero_covariance_zero_gain(self):
        """Test P = 0 gives K = 0 so z has no effect."""
        config = KalmanConfig.identity()
        state = KalmanState([1.0, 2.0, 3.0], np.zeros((3, 3)))
        assert np.array_equal(kalman_gain(state, config), np.zeros((3, 3)))
        assert np.array_equal(kalman_update(state, [100.0, -5.0, 7.0], config).x_hat, state.x_hat)

    def test_zero_innovation(self):
        """Test z = H x leaves x unchanged."""
        config = KalmanConfig.stacked()
        state = KalmanState([0.3, -0.2, 1.5], np.eye(3))
        z = config.H @ state.x_hat
        assert np.allclose(kalman_update(state, z, config).x_hat, state.x_hat, atol=1e-15)

    @pytest.mark.parametrize("p, r", [(1.0, 0.5), (1.1, 0.5), (0.25, 2.0), (7.0, 0.001)])
    def test_scalar_gain_closed_form(self, p, r):
        """Test each diagonal gain entry equals p / (p + r)."""
        gain = kalman_gain(KalmanState(np.zeros(3), p * np.eye(3)), KalmanConfig.identity(r_scale=r))
        assert np.allclose(np.diag(gain), p / (p + r), atol=1e-15, rtol=0)

    def test_singular_innovation(self):
        """Test P = 0 and R = 0 raises a numerical error with the condition."""
        config = KalmanConfig.identity(r_scale=0.0)
        with pytest.raises(NumericalError) as info:
            kalman_update(KalmanState(np.zeros(3), np.zeros((3, 3))), np.ones(3), config)
        assert info.value.rcond < 1e-12
        assert "condition" in str(info.value)

    def test_wrong_measurement_length(self):
        """Test a measurement that does not match H is a configuration error."""
        with pytest.raises(ConfigurationError):
            kalman_update(KalmanState(np.zeros(3), np.eye(3)), np.ones(9), KalmanConfig.identity())

    def test_pass_through(self):
        """Test Q = 0, R = 1e-12, H = I lands on z after one update from a unit prior."""
        config = KalmanConfig.identity(q_scale=0.0, r_scale=1e-12)
        rng = np.random.default_rng(5)
        for _ in range(20):
            z = rng.uniform(-10, 10, 3)
            state = kalman_update(kalman_predict(KalmanState(np.zeros(3), np.eye(3)), config), z, config)
            assert np.allclose(state.x_hat, z, atol=1e-9, rtol=0)

    def test_covariance_stays_psd(self):
        """Test P stays symmetric and PSD over 10,000 cycles."""
        config = KalmanConfig.stacked()
        rng = np.random.default_rng(42)
        state = KalmanState(np.zeros(3), np.eye(3))
        for _ in range(10_000):
            state = kalman_update(kalman_predict(state, config), rng.uniform(-100, 100, 9), config)
            assert state.is_valid()
        assert np.allclose(state.P, state.P.T, atol=1e-9)

    def test_large_prior_gives_sensor_mean(self):
        """Test P0 = 1e6 I makes one update land on the mean of the three triples."""
        config = KalmanConfig.stacked()
        z = np.array([1.0, 2.0, 3.0, 4.0, -2.0, 0.5, 10.0, 6.0, -1.0])
        state = kalman_update(kalman_predict(KalmanState(np.zeros(3), 1e6 * np.eye(3)), config), z, config)
        assert np.allclose(state.x_hat, z.reshape(3, 3).mean(axis=0), atol=1e-3)


class TestKalmanFilterDataset:
    """Test filtering a whole dataset."""

    def test_appends_three_columns(self, separable_dataset):
        """Test the filtered dataset carries N x 3 Kalman columns."""
        filtered = kalman_filter_dataset(separable_dataset)
        assert filtered.kalman.shape == (1000, 3)
        assert np.array_equal(filtered.channels, separable_dataset.channels)
        assert separable_dataset.kalman is None

    def test_constant_readings_fixed_point(self):
        """Test identical constant readings on every sensor stay put."""
        filtered = kalman_filter_dataset(_dataset(np.tile([2.0, -1.0, 0.5] * 3, (50, 1))))
        assert np.allclose(filtered.kalman, [[2.0, -1.0, 0.5]] * 50, atol=1e-12)

    def test_single_row_one_step(self):
        """Test a 1-row dataset applies exactly one predict + update."""
        row = np.array([1.0, 2.0, 3.0, 2.0, 2.0, 2.0, 0.0, -1.0, 4.0])
        config = KalmanConfig.stacked()
        x0 = row.reshape(3, 3).mean(axis=0)
        expected = kalman_update(kalman_predict(KalmanState(x0, np.eye(3)), config), row, config)
        filtered = kalman_filter_dataset(_dataset([row]), config)
        assert np.allclose(filtered.kalman[0], expected.x_hat, atol=1e-15)

    def test_large_prior_limit(self):
        """Test c = 1e6 on the first row matches the sensor mean."""
        row = np.array([5.0, 0.0, -3.0, 1.0, 1.0, 1.0, -2.0, 8.0, 0.5])
        config = KalmanConfig.stacked(initial_covariance=1e6)
        filtered = kalman_filter_dataset(_dataset([row]), config)
        assert np.allclose(filtered.kalman[0], row.reshape(3, 3).mean(axis=0), atol=1e-3)

    def test_smoothing(self):
        """Test filtered variance < half the variance of the raw 3-sensor mean."""
        rng = np.random.default_rng(7)
        signal = np.array([0.5, -1.0, 2.0] * 3)
        channels = signal + rng.normal(0.0, 1.0, size=(1000, 9))
        filtered = kalman_filter_dataset(_dataset(channels))
        raw_mean_x = channels[:, [0, 3, 6]].mean(axis=1)
        assert np.var(filtered.kalman[500:, 0]) < 0.5 * np.var(raw_mean_x[500:])

    def test_per_axis_measurement(self):
        """Test an H with three rows filters the per-axis sensor means."""
        filtered = kalman_filter_dataset(_dataset(np.tile(np.arange(9.0), (4, 1))), KalmanConfig.identity())
        assert np.allclose(filtered.kalman, [[3.0, 4.0, 5.0]] * 4, atol=1e-12)

    def test_empty_dataset(self):
        """Test filtering nothing is an ingestion error."""
        with pytest.raises(IngestionError):
            kalman_filter_dataset(Dataset([], np.zeros((0, 9)), [], []))
