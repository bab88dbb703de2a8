"""Weak-signal capacity approximations for stationary channels."""
__version__ = "0.1.0"
