"""Conforming finite elements for H(sym Curl) and H(dev sym Curl)."""

__version__ = "0.1.0"
