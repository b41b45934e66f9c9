"""Exactly solvable operators: eigenpolynomials and their strong asymptotics."""

__version__ = "1.0.0"
