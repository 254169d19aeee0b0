"""Constrained source codes for diffusion-based molecular communication."""

__version__ = "0.1.0"
