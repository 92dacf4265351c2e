"""Phase-space localization and entanglement of N spins 1/2."""

__version__ = "0.1.0"
