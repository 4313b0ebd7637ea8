"""Exception hierarchy."""


class VineInferError(Exception):
    """Base class for all errors raised by this package."""


class CopulaDomainError(VineInferError, ValueError):
    """A copula parameter lies outside the family's admissible domain."""


class ConvergenceError(VineInferError, ArithmeticError):
    """A numerical search failed to converge.

    Attributes
    ----------
    bracket : tuple or None
        Best bracket known when the search stopped.
    """

    def __init__(self, message, bracket=None, where=None):
        super().__init__(message)
        self.bracket = bracket
        self.where = where


class FitError(VineInferError, RuntimeError):
    """Maximum-likelihood fitting failed."""

    def __init__(self, message, family=None, where=None):
        super().__init__(message)
        self.family = family
        self.where = where


class SelectionError(FitError):
    """Every candidate family failed on an edge."""

    def __init__(self, message, failures=None, where=None):
        super().__init__(message, where=where)
        self.failures = failures or {}


class VineArrayError(VineInferError, ValueError):
    """A candidate vine array violates a structural condition.

    Attributes
    ----------
    condition : str
        Short name of the violated condition.
    column : int or None
        1-based column where it was detected.
    """

    def __init__(self, message, condition=None, column=None):
        super().__init__(message)
        self.condition = condition
        self.column = column


class StructureError(VineInferError, RuntimeError):
    """A vine structure operation (learning, re-rooting) is impossible."""


class DegenerateConditionalError(VineInferError, ArithmeticError):
    """The normalising integral of a conditional density vanished."""


class InputError(VineInferError, ValueError):
    """Malformed user data (constant column, bad CSV cell, short series)."""
