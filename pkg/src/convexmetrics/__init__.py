"""Distances, divergences and comparison bounds for s-concave probability measures."""

__version__ = "0.1.0"
