"""Exception hierarchy for fusionhar.

Every error carries the process exit code the command line maps it to.
"""

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_TRAINING = 2
EXIT_CONFIG = 3


class FusionError(Exception):
    """Base class for all fusionhar errors."""

    exit_code = EXIT_TRAINING


class IngestionError(FusionError):
    """Input data could not be read or cleaned."""

    exit_code = EXIT_INPUT


class SchemaError(IngestionError):
    """Column layout of an input file is not recognised."""

    def __init__(self, message: str, column: str | None = None):
        super().__init__(message)
        self.column = column


class ParseError(IngestionError):
    """A cell could not be converted to a number."""

    def __init__(self, message: str, line: int, column: str):
        super().__init__(f"{message} (line {line}, column '{column}')")
        self.line = line
        self.column = column


class EmptyJoinError(IngestionError):
    """Timestamp synchronization matched no rows."""


class ArgumentError(FusionError, ValueError):
    """An operation was called with invalid arguments."""

    exit_code = EXIT_CONFIG


class ConfigurationError(FusionError):
    """Run configuration, Kalman configuration or model file is invalid."""

    exit_code = EXIT_CONFIG


class TrainingError(FusionError):
    """A model could not be trained."""


class DegenerateModelError(TrainingError):
    """Training data holds fewer than two classes."""


class NumericalError(FusionError):
    """A linear-algebra step is ill-conditioned."""

    def __init__(self, message: str, rcond: float):
        super().__init__(f"{message} (reciprocal condition {rcond:.3e})")
        self.rcond = rcond
