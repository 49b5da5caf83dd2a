"""Reversible execution of a small while language and its parallel dialect."""

__version__ = "0.1.0"
