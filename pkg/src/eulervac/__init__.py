"""Numerical verification toolkit for weak-strong uniqueness of isentropic Euler flows with vacuum."""

__version__ = "0.1.0"
