"""Exact-arithmetic laboratory for image partition regularity of rational matrices."""

__version__ = "0.1.0"
