"""Atom laser output coupling: Thomas-Fermi decay model and 1D GPE solver."""

__version__ = "0.1.0"
