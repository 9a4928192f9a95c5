"""Exception types raised across the package."""


class MSRError(Exception):
    pass


class DivisionByZero(MSRError, ZeroDivisionError):
    pass


class SingularMatrix(MSRError, ValueError):
    pass


class PivotSingular(SingularMatrix):
    pass


class InvalidParameters(MSRError, ValueError):
    pass


class TooManyErasures(MSRError, ValueError):
    pass


class IncompleteInput(MSRError, ValueError):
    pass


class InvalidPlan(MSRError, ValueError):
    pass


class NotAHelper(MSRError, KeyError):
    pass


class IncompleteBundles(MSRError, ValueError):
    pass


class SingularRepairSystem(SingularMatrix):
    """The combined repair matrix for a plan is not invertible.

    This points at the evaluation-point assignment, not at corrupted data.
    """


class TooLarge(MSRError, ValueError):
    pass
