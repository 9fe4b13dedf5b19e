"""Analogue black holes: metrics, ergospheres, horizons and wave propagation."""

__version__ = "0.1.0"
