"""Cayley-graph balls, local constraints, Cayley diagrams and factor-of-i.i.d. rules."""

from .groups import MarkedGroup, make_group
from .balls import Ball, ball, local_ball

__version__ = "0.1.0"

__all__ = ["MarkedGroup", "make_group", "Ball", "ball", "local_ball", "__version__"]
