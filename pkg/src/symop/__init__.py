"""Finite categories, truncated symmetric operads and their polynomial monads."""
__version__ = "0.1.0"
