"""Sweepcore - prediction-correction solver for perturbed sweeping processes."""

__version__ = "0.3.0"
