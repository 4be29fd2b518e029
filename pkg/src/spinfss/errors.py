"""Exception hierarchy shared by all spinfss modules."""


class SpinFssError(Exception):
    """Base class for all spinfss errors."""


class CapacityError(SpinFssError):
    """Hilbert-space or subsystem dimension exceeds the configured ceiling."""


class DomainError(SpinFssError, ValueError):
    """Argument outside the mathematical domain of a formula."""


class NoConvergenceError(SpinFssError):
    """Iterative solver hit its iteration cap with residual above tolerance."""


class InvalidStateError(SpinFssError, ValueError):
    """A density matrix or state vector violates its invariants."""


class OrthogonalityLossError(SpinFssError):
    """Excited-state search lost orthogonality against the ground state."""


class InconclusiveError(SpinFssError):
    """An analysis could not be resolved inside the sampled grid."""


class DegenerateSeriesError(SpinFssError, ValueError):
    """A series column is degenerate (e.g. zero extremum) for the requested op."""


class SeriesFormatError(SpinFssError, ValueError):
    """Malformed series file; carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
