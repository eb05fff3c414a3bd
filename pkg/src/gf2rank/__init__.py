"""Exhaustive search for optimal bilinear decompositions over GF(2)."""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
