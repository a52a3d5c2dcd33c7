"""Reduction of 2D anisotropic elliptic systems to diagonal complex form."""
__version__ = "0.1.0"
