class ValidationError(ValueError):
    """Invalid input: bad file, out-of-range parameter, violated precondition."""


class NumericalError(ArithmeticError):
    """A computation produced a non-finite or degenerate result."""
