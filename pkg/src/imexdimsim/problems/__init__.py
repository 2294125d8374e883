from .benchmarks import (
    PROBLEMS,
    adsorption_desorption,
    advection_reaction,
    get_problem,
    stiff_relaxation,
    shallow_water,
    test_equation,
    zero_problem,
)
from .spatial import Grid1D, advection_fd4, weno5_derivative, weno5_flux_divergence, weno5_reconstruct

__all__ = [
    "PROBLEMS",
    "Grid1D",
    "adsorption_desorption",
    "advection_fd4",
    "advection_reaction",
    "get_problem",
    "stiff_relaxation",
    "shallow_water",
    "test_equation",
    "weno5_derivative",
    "weno5_flux_divergence",
    "weno5_reconstruct",
    "zero_problem",
]
