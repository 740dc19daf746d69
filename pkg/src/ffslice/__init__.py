"""Exact and Monte Carlo intersection statistics for varieties over finite fields."""

__version__ = "0.1.0"
