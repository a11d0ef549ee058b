"""Hand-drawn arrow programs for a simulated classroom robot: symbol
recognition, program compilation and playground simulation."""

__version__ = "0.1.0"
