"""Feature-level fusion and the linear Kalman filter."""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from src.core import FEATURE_NAMES, KALMAN_COLUMNS, SENSOR_ORDER, Dataset, SensorKind
from src.errors import ArgumentError, ConfigurationError, IngestionError, NumericalError

logger = logging.getLogger(__name__)

STATE_DIM = 3
MIN_RCOND = 1e-12
SYMMETRY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class FeatureView:
    """Column selection of a dataset restricted to a set of sensors."""

    dataset: Dataset
    sensors: Tuple[SensorKind, ...]

    @property
    def columns(self) -> Tuple[int, ...]:
        """Channel indices in canonical channel order."""
        return tuple(c for kind in self.sensors for c in kind.columns)

    @property
    def column_names(self) -> Tuple[str, ...]:
        return tuple(FEATURE_NAMES[c] for c in self.columns)

    @property
    def shape(self) -> Tuple[int, int]:
        return (len(self.dataset), len(self.columns))

    @property
    def matrix(self) -> np.ndarray:
        """N x d feature matrix."""
        return self.dataset.channels[:, list(self.columns)]


def feature_fuse(dataset: Dataset, sensors: Iterable[SensorKind]) -> FeatureView:
    """Concatenate the channels of the selected sensors.

    Args:
        dataset: Source dataset
        sensors: Non-empty sensor selection (normalised to canonical channel order)

    Returns:
        FeatureView of width 3 x |sensors|

    Raises:
        ArgumentError: If no sensor is selected
    """
    selected = set(sensors)
    if not selected:
        raise ArgumentError("Feature fusion needs at least one sensor")
    return FeatureView(dataset, tuple(kind for kind in SENSOR_ORDER if kind in selected))


def _is_psd(matrix: np.ndarray) -> bool:
    if not np.allclose(matrix, matrix.T, atol=SYMMETRY_TOL, rtol=0.0):
        return False
    return bool(np.all(np.linalg.eigvalsh(matrix) >= -SYMMETRY_TOL))


@dataclass(frozen=True, eq=False)
class KalmanConfig:
    """Linear model x_k = F x_{k-1} + B u + w, z_k = H x_k + v.

    ``initial_covariance`` scales the identity used as P_0 when filtering a dataset.
    """

    F: np.ndarray
    B: np.ndarray
    u: np.ndarray
    H: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    initial_covariance: float = 1.0

    def __post_init__(self):
        for name in ("F", "B", "u", "H", "Q", "R"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))

        m = self.measurement_dim
        expected = {
            "F": (STATE_DIM, STATE_DIM),
            "B": (STATE_DIM, self.u.shape[0]),
            "Q": (STATE_DIM, STATE_DIM),
            "R": (m, m),
        }
        if self.u.ndim != 1 or self.H.ndim != 2 or self.H.shape[1] != STATE_DIM:
            raise ConfigurationError(f"H must be m x {STATE_DIM} and u a vector")
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ConfigurationError(f"{name} must be {shape}, got {getattr(self, name).shape}")
        if not _is_psd(self.Q):
            raise ConfigurationError("Q must be symmetric positive semi-definite")
        if not _is_psd(self.R):
            raise ConfigurationError("R must be symmetric positive semi-definite")
        if self.initial_covariance < 0:
            raise ConfigurationError("initial_covariance must be >= 0")

    @property
    def measurement_dim(self) -> int:
        """m: number of rows of H."""
        return int(self.H.shape[0])

    @classmethod
    def identity(
        cls, q_scale: float = 0.1, r_scale: float = 0.5, initial_covariance: float = 1.0
    ) -> "KalmanConfig":
        """Direct 3-axis observation (H = I_3)."""
        return cls(
            F=np.eye(STATE_DIM),
            B=np.zeros((STATE_DIM, 1)),
            u=np.zeros(1),
            H=np.eye(STATE_DIM),
            Q=q_scale * np.eye(STATE_DIM),
            R=r_scale * np.eye(STATE_DIM),
            initial_covariance=initial_covariance,
        )

    @classmethod
    def stacked(
        cls, q_scale: float = 0.1, r_scale: float = 0.5, initial_covariance: float = 1.0
    ) -> "KalmanConfig":
        """The three sensor triples as three noisy views of one X/Y/Z state.

        H = [I_3; I_3; I_3] and R = r_scale * I_9.
        """
        n_obs = len(SENSOR_ORDER) * STATE_DIM
        return cls(
            F=np.eye(STATE_DIM),
            B=np.zeros((STATE_DIM, 1)),
            u=np.zeros(1),
            H=np.vstack([np.eye(STATE_DIM)] * len(SENSOR_ORDER)),
            Q=q_scale * np.eye(STATE_DIM),
            R=r_scale * np.eye(n_obs),
            initial_covariance=initial_covariance,
        )


@dataclass(frozen=True, eq=False)
class KalmanState:
    """Estimate x_hat with covariance P."""

    x_hat: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x_hat", np.asarray(self.x_hat, dtype=np.float64).reshape(-1))
        object.__setattr__(self, "P", np.asarray(self.P, dtype=np.float64))

    def is_valid(self) -> bool:
        """P symmetric and numerically positive semi-definite."""
        return _is_psd(self.P)


def _check_state(state: KalmanState, config: KalmanConfig) -> None:
    if state.x_hat.shape != (STATE_DIM,) or state.P.shape != (STATE_DIM, STATE_DIM):
        raise ConfigurationError(
            f"State must be a {STATE_DIM}-vector with {STATE_DIM}x{STATE_DIM} covariance"
        )
    if config.F.shape[0] != state.x_hat.shape[0]:
        raise ConfigurationError("State dimension does not match F")


def _symmetrize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


def kalman_predict(state: KalmanState, config: KalmanConfig) -> KalmanState:
    """Propagate the estimate one step: x <- F x + B u, P <- F P F^T + Q."""
    _check_state(state, config)
    x_hat = config.F @ state.x_hat + config.B @ config.u
    P = config.F @ state.P @ config.F.T + config.Q
    return KalmanState(x_hat, _symmetrize(P))


def kalman_gain(state: KalmanState, config: KalmanConfig) -> np.ndarray:
    """K = P H^T (H P H^T + R)^-1 via a Cholesky factor of the innovation covariance.

    Raises:
        NumericalError: If the innovation covariance is singular or ill-conditioned
    """
    _check_state(state, config)
    S = _symmetrize(config.H @ state.P @ config.H.T + config.R)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.linalg.cond(S)
    rcond = 0.0 if not np.isfinite(cond) or cond == 0 else 1.0 / cond
    if rcond < MIN_RCOND:
        raise NumericalError("Innovation covariance is singular", rcond)
    try:
        factor = cho_factor(S)
    except LinAlgError:
        raise NumericalError("Innovation covariance is not positive definite", rcond)
    # P and S are symmetric, so (S^-1 H P)^T = P H^T S^-1.
    return cho_solve(factor, config.H @ state.P).T


def kalman_update(state: KalmanState, z: np.ndarray, config: KalmanConfig) -> KalmanState:
    """Correct the estimate with measurement z.

    Args:
        state: Predicted state
        z: m-vector measurement
        config: Filter configuration

    Returns:
        Posterior state

    Raises:
        ConfigurationError: If z does not have m = rows(H) entries
        NumericalError: If the innovation covariance cannot be inverted
    """
    z = np.asarray(z, dtype=np.float64).reshape(-1)
    if z.shape[0] != config.measurement_dim:
        raise ConfigurationError(f"Measurement has {z.shape[0]} entries, H expects {config.measurement_dim}")
    K = kalman_gain(state, config)
    x_hat = state.x_hat + K @ (z - config.H @ state.x_hat)
    P = (np.eye(STATE_DIM) - K @ config.H) @ state.P
    return KalmanState(x_hat, _symmetrize(P))


def _measurements(channels: np.ndarray, config: KalmanConfig) -> np.ndarray:
    """Stacked nine-channel rows for m = 9; per-axis sensor means for m = 3."""
    if config.measurement_dim == len(FEATURE_NAMES):
        return channels
    if config.measurement_dim == STATE_DIM:
        return channels.reshape(-1, len(SENSOR_ORDER), STATE_DIM).mean(axis=1)
    raise ConfigurationError(
        f"H must have {len(FEATURE_NAMES)} or {STATE_DIM} rows to filter a dataset, "
        f"got {config.measurement_dim}"
    )


def kalman_filter_dataset(dataset: Dataset, config: Optional[KalmanConfig] = None) -> Dataset:
    """Run predict/update over every row in timestamp order.

    The initial estimate is the mean of the three sensor triples of the first
    row with covariance ``config.initial_covariance * I``.

    Args:
        dataset: Non-empty dataset
        config: Filter configuration (defaults to the stacked model)

    Returns:
        Copy of the dataset with "Kalman Filtered X/Y/Z" columns
    """
    if len(dataset) == 0:
        raise IngestionError("Cannot filter an empty dataset")
    config = config or KalmanConfig.stacked()

    measurements = _measurements(dataset.channels, config)
    x0 = dataset.channels[0].reshape(len(SENSOR_ORDER), STATE_DIM).mean(axis=0)
    state = KalmanState(x0, config.initial_covariance * np.eye(STATE_DIM))

    filtered = np.empty((len(dataset), len(KALMAN_COLUMNS)))
    for k, z in enumerate(measurements):
        state = kalman_update(kalman_predict(state, config), z, config)
        filtered[k] = state.x_hat

    logger.info("Kalman-filtered %d rows (m=%d)", len(dataset), config.measurement_dim)
    return dataset.with_kalman(filtered)
