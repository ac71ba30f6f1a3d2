"""Pipeline error hierarchy, mapped onto CLI exit codes."""


class PoicalibError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 1


class ConfigError(PoicalibError):
    """Invalid configuration (bad key, bad value, missing path)."""

    exit_code = 2


class DataError(PoicalibError):
    """Malformed or insufficient input data."""

    exit_code = 3


class TrainingError(PoicalibError):
    """Model fitting failed (e.g. divergence)."""

    exit_code = 4


class EvaluationError(PoicalibError):
    """Evaluation or reporting failed (missing artifact, digest mismatch)."""

    exit_code = 5
