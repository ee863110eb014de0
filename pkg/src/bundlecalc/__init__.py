"""Measurable Banach bundles and L0-normed modules over finite atomic spaces."""

__version__ = "0.1.0"
