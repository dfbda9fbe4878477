"""Exact computations of string-topology spectral sequences and products."""

__version__ = "0.1.0"
