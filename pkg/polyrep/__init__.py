"""Minimal polynomial-inequality representations of polyhedra and basic closed semialgebraic sets."""

__version__ = "0.1.0"
