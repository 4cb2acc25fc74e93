"""Holomorphic discs on Lagrangian tori in conic bundles over C^2."""

from .conic import AmbientPoint, ConicParams, ReducedPoint

__all__ = ["AmbientPoint", "ConicParams", "ReducedPoint"]
__version__ = "0.1.0"
