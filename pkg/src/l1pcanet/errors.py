"""Exception hierarchy shared across the toolkit.

Exit-code mapping used by the CLI: usage errors -> 1, data errors -> 2,
numeric errors -> 3.
"""


class L1PCANetError(Exception):
    """Base class for all toolkit errors."""


class InvalidParameterError(L1PCANetError):
    """A parameter violates a precondition (bad patch size, shapes, ...)."""


class InvalidStateError(L1PCANetError):
    """An operation was applied to a value in the wrong state."""


class DataError(L1PCANetError):
    """Dataset or file-level problem (bad file, mixed dims, empty root)."""


class ModelFormatError(DataError):
    """Serialized model has wrong magic, version, or is truncated."""


class DegenerateDataError(L1PCANetError):
    """Solver input admits no well-defined direction (zero update)."""


class NumericError(L1PCANetError):
    """Numerical routine failed to converge or produced non-finite values."""
