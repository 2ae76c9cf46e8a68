"""Exception hierarchy.

Everything raised on purpose by the library derives from :class:`BetaShiftError`.
Input problems (bad polynomials, inadmissible words, parameters out of range)
derive from :class:`InputError`; the command line maps those to exit code 2.
:class:`InvariantViolation` marks a failed internal consistency check and maps
to exit code 3.
"""

from __future__ import annotations


class BetaShiftError(Exception):
    """Base class for library errors."""


class InputError(BetaShiftError, ValueError):
    """The caller supplied something the operation cannot accept."""


class InvariantViolation(BetaShiftError, AssertionError):
    """An internal consistency check failed."""


# number fields and polynomials
class NotMonic(InputError):
    pass


class NoRootAboveOne(InputError):
    pass


class NotSquarefree(InputError):
    pass


class MultipleRootsAboveOne(InputError):
    pass


class DivisionByZero(InputError, ZeroDivisionError):
    pass


class NotInvertible(InputError):
    """A nonzero element has no inverse: the polynomial is reducible."""


class PolynomialSyntaxError(InputError):
    pass


# expansions
class NotPisot(InputError):
    pass


class PeriodNotFound(InputError):
    pass


class OutOfRange(InputError):
    pass


class BadDigit(InputError):
    pass


# languages and automata
class NotAdmissible(InputError):
    pass


class NoSynchronizingWord(InputError):
    pass


class NotSynchronizing(InputError):
    pass


# measures
class NotIrreducible(InputError):
    pass


class NotErgodicClass(InputError):
    pass


class NotSupported(InputError):
    pass


# martingales
class BadDelta(InputError):
    pass


class BadDeltaStar(InputError):
    pass


class ZeroConditional(InputError):
    pass


class NegativeSlack(InputError):
    pass


class NoSavingsProperty(InputError):
    pass
