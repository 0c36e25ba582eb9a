"""Exception hierarchy shared by all modules.

The CLI maps each category onto a distinct exit status.
"""


class PtfoptError(Exception):
    """Base class for all package errors."""

    category = "error"


class ValidationError(PtfoptError, ValueError):
    """Invalid user input: configuration, pattern, file contents."""

    category = "validation"


class NumericalError(PtfoptError, ArithmeticError):
    """A computation is undefined for the given inputs."""

    category = "numerical"
