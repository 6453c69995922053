"""
Exception hierarchy shared by every package, plus the CLI exit-code mapping.
"""


class CassError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 2


class ArgumentError(CassError, ValueError):
    """Invalid argument to a generator, transform or metric."""


class ConfigurationError(CassError):
    """Invalid or inconsistent configuration (spec, weights, STFT settings)."""


class UsageError(CassError):
    """Command-line misuse: bad subcommand input, refusing to overwrite, etc."""


class DataError(CassError):
    """Missing or malformed data on disk."""

    exit_code = 3


class IngestError(DataError):
    """Audio stems could not be turned into examples."""


class AudioReadError(IngestError):
    def __init__(self, path, reason: str):
        super().__init__(f"cannot read audio file {path}: {reason}")
        self.path = path


class SampleRateMismatchError(IngestError):
    pass


class NoSegmentsError(IngestError):
    pass


class CheckpointError(DataError):
    """Checkpoint directory missing, corrupt or inconsistent."""


class NumericError(CassError):
    """Non-finite loss or metric during training/evaluation."""

    exit_code = 4


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, CassError):
        return exc.exit_code
    return 1
