"""Statevector toolkit for Fibonacci string-net condensates."""
from .fibsym import PHI

__all__ = ["PHI"]
__version__ = "0.1.0"
