"""Exception taxonomy.

Every failure mode that a caller might reasonably want to branch on gets its
own class; everything derives from LtwistError so the CLI can map the whole
family onto exit codes.
"""

from __future__ import annotations


class LtwistError(Exception):
    """Base class for all errors raised by this package."""


class PoleError(LtwistError):
    """Argument is at (or numerically indistinguishable from) a pole."""


class ConvergenceError(LtwistError):
    """A series or quadrature failed to reach the requested tolerance.

    The bound that *was* achieved is attached so callers can decide whether
    the partial result is still useful.
    """

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class DegenerateError(LtwistError):
    """Parameters hit a degenerate configuration the algorithm cannot resolve."""


class NotPrimeError(LtwistError):
    """A modulus that must be prime is not."""


class PrincipalError(LtwistError):
    """Operation undefined for the principal character."""


class ParseError(LtwistError):
    """Malformed FORM file; carries the 1-based line number."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class InvariantError(LtwistError):
    """Parsed data violates a structural invariant (which one is in the message)."""


class MissingPrimeError(LtwistError):
    """A coefficient computation needs a prime outside the stored table."""


class TailError(LtwistError):
    """A certified tail bound exceeds the tolerance budget."""


class SingularError(LtwistError):
    """A linear system that should be regular is singular (defensive)."""


class NearZeroError(LtwistError):
    """A quantity that must be bounded away from zero is too small to divide by."""


class IsolationError(LtwistError):
    """A contour meant to isolate one zero contains or nearly touches another."""


class InconclusiveError(LtwistError):
    """Refinement hit its depth cap without certifying or refuting."""


class PoleSampleError(LtwistError):
    """A randomly drawn sample landed on a pole of an exact identity; resample."""
