"""Exception types shared across the package."""


class PreconditionError(ValueError):
    """A numerical precondition failed (grid too coarse, window too small, ...).

    The CLI maps these to exit code 3.  Plain ValueError means malformed or
    out-of-range input data and maps to exit code 2.
    """


class GridMismatchError(PreconditionError):
    """Two objects that must share a frequency grid do not."""


class GridTooCoarseError(PreconditionError):
    """The grid spacing cannot resolve a requested spectral or temporal width."""

    def __init__(self, message, ratio=None):
        super().__init__(message)
        self.ratio = ratio


class GridTooNarrowError(PreconditionError):
    """The grid span does not cover a requested spectral width."""

    def __init__(self, message, ratio=None):
        super().__init__(message)
        self.ratio = ratio


class WindowTooSmallError(PreconditionError):
    """The shutter window is too short relative to the correlation width."""


class BatchTooSmallError(PreconditionError):
    """Too few events for the requested estimator."""


class DegenerateStateError(PreconditionError):
    """The state has no usable statistics for the requested quantity."""


class AdmissibilityError(PreconditionError):
    """A cross-spectrum violates the admissibility bound of its declared regime."""
