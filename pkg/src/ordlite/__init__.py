"""Desk-scale Bitcoin ordinals / BRC-20 indexer."""

__version__ = "0.1.0"
