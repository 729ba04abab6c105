"""Spectral invariants of the Dirac operator on circle bundles over cusped hyperbolic surfaces."""

__version__ = "0.1.0"
