"""Utility functions for FairMetric."""

from src.utils.grids import BetaGrid, parse_grid, prepare_beta_grid
from src.utils.projection import project_polytope
from src.utils.sampling import sample_allocation, sample_bounded_spread, sample_dominating

__all__ = [
    "BetaGrid",
    "parse_grid",
    "prepare_beta_grid",
    "project_polytope",
    "sample_allocation",
    "sample_bounded_spread",
    "sample_dominating",
]
