"""Numerical laboratory for weighted Hankel operators on Paley–Wiener spaces
of convex domains and their Besov-space characterisation."""

__version__ = "0.1.0"
