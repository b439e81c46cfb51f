"""Exact computations with rank-two genus-one commuting differential operators and their spectral sheaves."""

__version__ = "0.1.0"
