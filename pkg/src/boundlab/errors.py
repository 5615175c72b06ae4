"""Exception hierarchy shared by all boundlab modules."""


class BoundlabError(Exception):
    """Base class for every error raised by boundlab."""


class StructuralError(BoundlabError, ValueError):
    """Shapes, indices or arguments are inconsistent with the operation."""


class DegenerateInputError(BoundlabError, ValueError):
    """Input is well-formed but degenerate (zero column, zero vector, ...)."""


class SingularityError(BoundlabError, ArithmeticError):
    """A system is rank deficient beyond the configured condition cap."""

    def __init__(self, message, condition=float("inf")):
        super().__init__(message)
        self.condition = condition


class BudgetError(BoundlabError, RuntimeError):
    """A combinatorial enumeration would exceed its configured budget."""


class InapplicableError(BoundlabError, ValueError):
    """The hypothesis of a bound is not satisfied for the given input."""


class ConvergenceError(BoundlabError, RuntimeError):
    """An iterative solver did not reach its tolerance."""
