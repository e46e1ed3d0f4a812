"""Regret minimization for two-player zero-sum extensive-form games."""

__version__ = "0.1.0"
