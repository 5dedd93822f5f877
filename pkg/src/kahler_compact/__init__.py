"""Conformal compactification of radial Kähler ALE metrics, with numerical certificates."""

__version__ = "0.1.0"
