"""Exact computations with finite quotients of uniform pro-p groups."""

__version__ = "0.1.0"
