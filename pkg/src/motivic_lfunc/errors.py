"""Exception hierarchy shared by every module of the package."""


class LFunctionError(Exception):
    """Base class for all errors raised by motivic_lfunc."""


class PoleError(LFunctionError, ZeroDivisionError):
    """A function was evaluated at (or numerically on top of) one of its poles."""


class DivisionByZeroSeries(LFunctionError, ZeroDivisionError):
    """Series division by a series that vanishes on its whole window."""


class WindowError(LFunctionError):
    """A requested coefficient lies outside the stored truncation window."""


class AmbiguityError(LFunctionError):
    """Hodge numbers sit too close to the boundary of an equivalence class."""


class PrecisionError(LFunctionError):
    """Cancellation ate more digits than the guard digits available."""


class TruncationError(LFunctionError):
    """More terms are needed than the inputs can provide."""


class DegenerateError(LFunctionError):
    """A continued-fraction quotient is numerically indistinguishable from zero."""


class CFDivisionByZero(LFunctionError, ZeroDivisionError):
    """A continued-fraction convergent hit a vanishing intermediate denominator."""


class CrossoverError(LFunctionError):
    """Small-t and large-t evaluations disagree at the crossover point."""


class UnknownParameterError(LFunctionError):
    """An operation needs a parameter that the descriptor marks as unknown."""


class IllConditionedError(LFunctionError):
    """A linear system is too ill-conditioned for the available guard digits."""


class NonIntegralError(LFunctionError):
    """A coefficient expected to be an integer is not close to one."""


class ParseError(LFunctionError, ValueError):
    """A descriptor or coefficient file could not be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(LFunctionError, ValueError):
    """A descriptor violates one of the standing assumptions on L-series."""
