"""Spectral collocation eigensolvers for singular Sturm-Liouville problems."""

__version__ = "0.1.0"
