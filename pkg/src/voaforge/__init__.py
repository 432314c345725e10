"""Exact computer algebra for chiral differential operators and related vertex algebras."""

__version__ = "0.1.0"
