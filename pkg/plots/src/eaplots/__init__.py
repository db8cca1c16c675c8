"""Batch figure generation from spatial-EA harness output files."""

import matplotlib

matplotlib.use("Agg")

__version__ = "0.1.0"
