"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Inputs have incompatible or unsupported dimensions."""


class NonFiniteError(ValueError):
    """An input contains NaN or Inf entries."""


class ConvergenceError(RuntimeError):
    """An iterative solve hit its iteration cap; callers may record the
    affected trial as a failure instead of aborting."""


class RankDeficientError(RuntimeError):
    """A subspace block is numerically rank deficient (ESPRIT cannot
    proceed); harness-level code counts this as a failed trial."""


class NotOrthonormalError(ValueError):
    """A matrix expected to have orthonormal columns does not."""


class SnapshotParseError(ValueError):
    """A snapshot CSV file is malformed; carries the offending row."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class ConfigError(ValueError):
    """An experiment configuration is inconsistent or out of range."""
