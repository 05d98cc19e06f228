"""Operator models on truncated full Fock spaces for weighted noncommutative domains."""

__version__ = "0.1.0"
