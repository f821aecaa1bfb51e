"""Quantified differential dynamic logic toolkit."""

__version__ = "0.1.0"
