"""Local normal forms of smooth maps, equivariant reductions and Kuranishi models."""

__version__ = "0.1.0"
