"""Exception types shared across the package.

The CLI maps these onto exit codes: ``ArgumentError``/``DomainError``/
``ConstructionError`` -> 1, ``NumericError`` -> 2.
"""


class ArgumentError(ValueError):
    """Malformed input: wrong shapes, out-of-range counts, bad config keys."""


class DomainError(ValueError):
    """A transform or oracle evaluated outside its region of validity."""


class ConstructionError(ValueError):
    """A model generator or grid could not be built as requested."""


class NumericError(ArithmeticError):
    """A numerical routine failed its own accuracy check."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
