"""Data models for fairness computations."""

from src.models.allocation import (
    AllocationVector,
    FairnessParams,
    FairnessValue,
    LimitDirection,
    SingularCase,
    as_allocation,
)
from src.models.report import CheckResult, CheckStatus, SuiteReport
from src.models.tradeoff import FeasibleRegion, ParetoFlag, SolverOptions, TradeoffPoint

__all__ = [
    "AllocationVector",
    "FairnessParams",
    "FairnessValue",
    "LimitDirection",
    "SingularCase",
    "as_allocation",
    "CheckResult",
    "CheckStatus",
    "SuiteReport",
    "FeasibleRegion",
    "ParetoFlag",
    "SolverOptions",
    "TradeoffPoint",
]
