"""Exception types shared across modules.

The CLI maps these onto exit codes: usage 2, data/estimator 3, capacity 4.
"""


class FibnetError(Exception):
    """Base class for all package errors."""


class CapacityError(FibnetError, ValueError):
    """Problem size exceeds a documented guard."""


class DataError(FibnetError, ValueError):
    """Malformed input data or an estimator that is undefined on its input."""


class DomainError(FibnetError, ValueError):
    """Argument outside the mathematical domain of an operation."""
