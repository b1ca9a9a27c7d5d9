"""Entanglement dynamics between a static cavity and a shaken cavity."""

__version__ = "0.1.0"
