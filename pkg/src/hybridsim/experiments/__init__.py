"""Synthetic ground truth, experiment pipelines and the gradient benchmark."""
