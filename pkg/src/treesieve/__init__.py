"""Algebraic detection of bounded-leaf subtrees over GF(2^64)."""

__version__ = "0.1.0"
