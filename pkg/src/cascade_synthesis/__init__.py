"""Secure cascade channel synthesis: rate regions and exact small-n simulation."""

__version__ = "0.1.0"
