"""
Engine Errors for lattice-multiscale

Every failure the engine can report is an EngineError subclass, so the
command-line surface and the tool server can tell engine failures apart
from programming errors.
"""


class EngineError(Exception):
    """Base class for all failures raised by the reduction engine."""


class ParseError(EngineError, ValueError):
    """Text does not follow the coefficient or differential-polynomial grammar."""


class ZeroDenominator(EngineError, ZeroDivisionError):
    """A rational function was built with a zero denominator."""


class DivisionByZero(EngineError, ZeroDivisionError):
    """Division by the zero element of Q(h)."""


class PoleAtPoint(EngineError):
    """A rational function was evaluated at a root of its denominator."""


class NotExact(EngineError):
    """A differential polynomial is not a total xi-derivative."""


class MissingFlow(EngineError):
    """An evolutionary derivation needs a flow for a level that was not supplied."""

    def __init__(self, level: int, detail: str = ""):
        self.level = level
        message = f"No flow supplied for level {level}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class NotInSpace(EngineError):
    """A polynomial has monomials outside the requested graded space."""


class ZeroDispersion(EngineError):
    """The dispersion coefficient a of the potential KdV flow vanished."""


class TruncationMismatch(EngineError):
    """Two epsilon-series with different truncation orders were combined."""


class NonSmallArgument(EngineError):
    """An analytic kernel was composed with a series that has an epsilon^0 term."""


class ImaginarySpeed(EngineError):
    """The linear wave speed is not real (defocusing sign requested)."""


class UnremovableSecularity(EngineError):
    """A residual monomial can be assigned neither to a flow nor to a forcing term."""


class Eps7Unsatisfied(EngineError):
    """The order-7 compatibility condition failed, so f^(t3) is undefined."""


class StageMissing(EngineError):
    """A compatibility check needs a reduction stage that was not run."""


class UncoveredVariable(EngineError):
    """A jet sample does not assign a value to a variable of the expression."""
