"""Interference-alignment linear network codes for three unicast sessions."""

__version__ = "0.1.0"
