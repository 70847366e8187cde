"""Exact symbolic engine for Drinfeld-Sokolov hierarchies and tau-structures."""

__version__ = "0.1.0"
