"""Hecke characters of imaginary quadratic fields, their Voronoi summation and numerical oracles."""

__version__ = "0.1.0"
