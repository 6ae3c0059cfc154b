"""Exact homology toolkit for complexes and posets over finite rings."""

__version__ = "0.1.0"
