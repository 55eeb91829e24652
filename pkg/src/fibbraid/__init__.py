"""Topological compilation of two-qubit gates from six-Fibonacci-anyon braids."""
__version__ = "0.1.0"
