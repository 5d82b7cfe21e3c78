"""Differentiable articulated rigid-body simulation with neural augmentation."""

__version__ = "0.1.0"
