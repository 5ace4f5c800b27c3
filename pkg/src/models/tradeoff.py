"""Feasible region and tradeoff curve models."""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.config import Settings
from src.models.allocation import AllocationVector


class ParetoFlag(Enum):
    """Whether Pareto preservation is guaranteed for a lambda."""

    PRESERVED = "preserved"
    AT_RISK = "at_risk"


class FeasibleRegion(BaseModel):
    """Polytope {x >= 0 : A x <= b}."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    a_matrix: list[list[float]] = Field(..., alias="A", min_length=1)
    b_vector: list[float] = Field(..., alias="b", min_length=1)
    names: list[str] | None = None

    @model_validator(mode="after")
    def _check_shapes(self) -> "FeasibleRegion":
        widths = {len(row) for row in self.a_matrix}
        if len(widths) != 1 or 0 in widths:
            raise ValueError("A must be a non-empty rectangular matrix")
        if len(self.b_vector) != len(self.a_matrix):
            raise ValueError(f"b has {len(self.b_vector)} entries, A has {len(self.a_matrix)} rows")
        if self.names is not None and len(self.names) != self.n:
            raise ValueError(f"names has {len(self.names)} entries, expected {self.n}")
        if not np.all(np.isfinite(self.a)) or not np.all(np.isfinite(self.b)):
            raise ValueError("A and b must be finite")
        return self

    @property
    def a(self) -> np.ndarray:
        return np.array(self.a_matrix, dtype=float)

    @property
    def b(self) -> np.ndarray:
        return np.array(self.b_vector, dtype=float)

    @property
    def n(self) -> int:
        """Number of users."""
        return len(self.a_matrix[0])

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        """Membership test with an absolute slack."""
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= -tol) and np.all(self.a @ x <= self.b + tol))


@dataclass(frozen=True)
class TradeoffPoint:
    """Maximizer of the tradeoff objective for one lambda."""

    lam: float
    beta: float
    allocation: AllocationVector
    fairness: float
    throughput: float
    phi: float
    pareto_flag: ParetoFlag
    oracle_phi: float | None = None


class SolverOptions(BaseModel):
    """Knobs for multi-start projected gradient ascent."""

    model_config = ConfigDict(frozen=True)

    starts: int = Field(default=16, ge=1)
    max_iterations: int = Field(default=10_000, ge=1)
    tol: float = Field(default=1e-10, gt=0)
    seed: int = 7
    grid_pitch: float = Field(default=1e-3, gt=0)
    grid_check: bool = True
    max_grid_points: int = Field(default=4_000_000, ge=1)

    @classmethod
    def from_settings(cls, settings: Settings, **overrides) -> "SolverOptions":
        """Defaults taken from application settings."""
        values = {
            "starts": settings.solver_starts,
            "max_iterations": settings.solver_max_iterations,
            "tol": settings.solver_tol,
            "seed": settings.default_seed,
            "grid_pitch": settings.solver_grid_pitch,
        }
        values.update(overrides)
        return cls(**values)
