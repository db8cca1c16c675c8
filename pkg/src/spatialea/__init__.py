"""Spatially embedded evolutionary algorithm simulator on a toroidal world."""

__version__ = "0.1.0"
