"""Exact computations on Cartan matrices, quadratic forms and p-group actions."""
__version__ = "1.0.0"
