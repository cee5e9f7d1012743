"""Bounded integer linear programs: exhaustive, proximity-based and halving solvers."""
from .divconq import (
    DecompositionCheck,
    HalvingGraph,
    decompose_solution,
    halve_upper_bounds,
    halving_chain,
    iterate_decomposition,
    scaled_distance,
    solve_divide_conquer,
)
from .lp import lp_relax
from .model import IlpInstance, IlpResult, LpSolution, Status, brute_force_ilp
from .proximity import ProximityStats, proximity_radius, solve_proximity

SOLVERS = {
    "proximity": solve_proximity,
    "divconq": solve_divide_conquer,
    "brute": brute_force_ilp,
}

__all__ = [
    "DecompositionCheck",
    "HalvingGraph",
    "IlpInstance",
    "IlpResult",
    "LpSolution",
    "ProximityStats",
    "SOLVERS",
    "Status",
    "brute_force_ilp",
    "decompose_solution",
    "halve_upper_bounds",
    "halving_chain",
    "iterate_decomposition",
    "lp_relax",
    "proximity_radius",
    "scaled_distance",
    "solve_divide_conquer",
    "solve_proximity",
]
