"""Services for FairMetric."""

from src.services.artifacts import ArtifactWriter, AllocationLoader, load_region, parse_allocations
from src.services.solver import TradeoffSolver, grid_oracle, solver_suite
from src.services.suites import SuiteRunner

__all__ = [
    "ArtifactWriter",
    "AllocationLoader",
    "load_region",
    "parse_allocations",
    "TradeoffSolver",
    "grid_oracle",
    "solver_suite",
    "SuiteRunner",
]
