"""Finite Grothendieck sites, sheaves, descent and cohomology with exhaustive checks."""

__version__ = "0.1.0"
