"""Noisy circuit simulation and randomized error cancellation for parametric circuits."""

__version__ = "0.1.0"
