"""Computational laboratory for discrete subgroups of SO(n,2)."""

__version__ = "0.1.0"
