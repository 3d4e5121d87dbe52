"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class PestoError(Exception):
    """Base class for all package errors."""


class SpecMismatch(PestoError):
    """Operands live in different finite fields."""


class DivisionByZero(PestoError, ZeroDivisionError):
    pass


class DimensionMismatch(PestoError, ValueError):
    pass


class ParamRange(PestoError, ValueError):
    """A parameter tuple violates the structural constraints of an operation."""


class RngExhausted(PestoError):
    """Rejection sampling did not succeed within its retry cap."""


class BudgetExceeded(PestoError):
    """A brute-force enumeration would exceed its configured budget."""


class DegreeTooHigh(PestoError, ValueError):
    pass


class SigningFailed(PestoError):
    """No consistent vinegar assignment was found within the retry cap."""


class IsolationAmbiguous(PestoError):
    """More quadratic components than the twist dimension were found."""


class ForgeryFailed(PestoError):
    """An attack ran to completion without producing a verified preimage."""


class InsufficientSamples(PestoError):
    """The relation space kept shrinking when more samples were added."""


class NoSolutionFound(PestoError):
    pass


class CodecError(PestoError, ValueError):
    pass


class BadMagic(CodecError):
    pass


class TruncatedStream(CodecError):
    pass


class ParamSanity(CodecError):
    pass
