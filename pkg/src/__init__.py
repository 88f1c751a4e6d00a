"""Collision-aware data allocation for multi-tube DNA storage."""

__version__ = "0.1.0"
