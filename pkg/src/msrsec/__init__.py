"""Secure minimum-storage regenerating codes under exact repair."""

__version__ = "0.1.0"
