"""Exception hierarchy shared by all subsystems.

The CLI maps these onto process exit codes: ConfigError -> 2,
NumericalError -> 3, ConnectivityError -> 4.
"""


class AfcError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(AfcError):
    """Invalid configuration: bad geometry, unknown keys, missing files."""


class NumericalError(AfcError):
    """Numerical failure: solver divergence, non-finite fields or losses."""


class ConnectivityError(AfcError):
    """Broker or worker communication failure (retryable transport errors)."""


class CheckpointError(AfcError):
    """Flow checkpoint or model file cannot be decoded."""


class VersionMismatchError(CheckpointError):
    """Serialized payload has an unknown magic or unsupported version."""


class CorruptPayloadError(CheckpointError):
    """Serialized payload is truncated or internally inconsistent."""


class ShapeMismatchError(CheckpointError):
    """Checkpoint geometry does not match the configured grid."""
