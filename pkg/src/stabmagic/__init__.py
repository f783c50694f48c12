"""Exact desk-scale tools for magic-state resource theory."""

__version__ = "0.1.0"
