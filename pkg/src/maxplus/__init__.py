"""Solvers and reductions for d-dimensional (max,+)-convolution, knapsack and bounded ILP."""
from .mdarray import NEG_INF, MDArray, linear_index, monotone_increasing, positions

__version__ = "0.1.0"

__all__ = ["NEG_INF", "MDArray", "linear_index", "monotone_increasing", "positions"]
