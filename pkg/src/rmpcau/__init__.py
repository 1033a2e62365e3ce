"""Robust MPC with adjustable uncertainty sets."""

__version__ = "0.1.0"
