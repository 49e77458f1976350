"""Conformal-motif assembly and evaluation toolkit for structure-based drug design."""

__version__ = "0.1.0"
