"""Quadrature coherence scale numerics for single-mode bosonic states."""

__version__ = "0.1.0"
