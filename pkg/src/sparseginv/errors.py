"""Exception hierarchy.

Two families: :class:`ValidationError` for inputs that violate a
precondition (CLI exit code 2) and :class:`NumericalError` for failures
that arise while computing (CLI exit code 3).
"""


class GinvError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(GinvError, ValueError):
    pass


class NumericalError(GinvError, ArithmeticError):
    pass


# validation
class InvalidMatrix(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class NotSymmetric(ValidationError):
    pass


class NotSkew(ValidationError):
    pass


class InvalidIndexSet(ValidationError):
    pass


class WrongCardinality(ValidationError):
    pass


class WrongRank(ValidationError):
    pass


class ZeroMatrix(ValidationError):
    pass


class InvalidLinearizer(ValidationError):
    pass


class InvalidParams(ValidationError):
    pass


class InvalidSpec(ValidationError):
    pass


# numerical
class SingularMatrix(NumericalError):
    pass


class SingularBlock(SingularMatrix):
    pass


class RankDeficientBlock(NumericalError):
    pass


class DegenerateCertificate(NumericalError):
    pass


class IterationLimit(NumericalError):
    pass


class NumericalBreakdown(NumericalError):
    pass


class Infeasible(NumericalError):
    pass


class SweepLimitExceeded(RuntimeWarning):
    """Warning issued when a local search stops at its sweep cap.

    The best iterate is still returned; any nonsingular block yields a
    valid reflexive generalized inverse.
    """
