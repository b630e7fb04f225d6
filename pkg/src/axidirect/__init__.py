"""Numerics for the axisymmetric direction problem of harmonic vector fields."""

__version__ = "0.1.0"
