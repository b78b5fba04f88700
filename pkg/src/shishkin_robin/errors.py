"""Exception types shared across the package."""


class DataEvaluationError(ValueError):
    """A problem data field produced a non-finite value or failed to evaluate."""


class NumericError(ArithmeticError):
    """The discrete solve broke down (zero pivot, non-finite iterate)."""
