"""LCR-Rot-hop aspect sentiment classifier and diagnostic-classifier probing of its layers."""

__version__ = "0.1.0"
