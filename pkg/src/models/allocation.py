"""Allocation vector and fairness parameter models."""

import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.errors import InvalidAllocationError


class SingularCase(Enum):
    """Which limiting member of the family produced a value."""

    NONE = "none"
    BETA_ONE = "beta_one"
    BETA_ZERO_LIMIT = "beta_zero_limit"
    PLUS_INF_LIMIT = "plus_inf_limit"
    MINUS_INF_LIMIT = "minus_inf_limit"


class LimitDirection(Enum):
    """Direction of the beta -> +/- infinity limits."""

    PLUS_INF = "plus_inf"
    MINUS_INF = "minus_inf"


@dataclass(frozen=True)
class AllocationVector:
    """Non-negative resource vector with at least one positive entry."""

    values: tuple[float, ...]
    label: str | None = None

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)

        if not values:
            raise InvalidAllocationError("allocation must contain at least one user")
        for index, value in enumerate(values):
            if not math.isfinite(value):
                raise InvalidAllocationError(f"entry {index} is not finite: {value}")
            if value < 0:
                raise InvalidAllocationError(f"entry {index} is negative: {value}")
        if not any(v > 0 for v in values):
            raise InvalidAllocationError("all-zero allocation has no defined fairness")

    @classmethod
    def of(cls, values: Sequence[float] | np.ndarray, label: str | None = None) -> "AllocationVector":
        """Build from any sequence of numbers."""
        return cls(tuple(np.asarray(values, dtype=float).ravel().tolist()), label)

    @property
    def array(self) -> np.ndarray:
        """Values as a fresh float64 array."""
        return np.array(self.values, dtype=float)

    @property
    def n(self) -> int:
        """Number of users."""
        return len(self.values)

    @property
    def total(self) -> float:
        """Total resource w(x), exactly rounded and order independent."""
        return math.fsum(self.values)

    @property
    def shares(self) -> np.ndarray:
        """Resource shares x / w(x)."""
        return self.array / self.total

    @property
    def has_zero(self) -> bool:
        """True if some user receives nothing."""
        return any(v == 0 for v in self.values)

    @property
    def active_users(self) -> int:
        """Number of users with positive resource."""
        return sum(1 for v in self.values if v > 0)

    @property
    def is_equal(self) -> bool:
        """True if every user receives the same amount."""
        return len(set(self.values)) == 1

    def scaled(self, factor: float) -> "AllocationVector":
        """Return the allocation multiplied by a positive factor."""
        return AllocationVector.of(self.array * factor, self.label)

    def __len__(self) -> int:
        return len(self.values)


def as_allocation(x: "AllocationVector | Sequence[float] | np.ndarray") -> AllocationVector:
    """Coerce user input into a validated allocation."""
    if isinstance(x, AllocationVector):
        return x
    return AllocationVector.of(x)


class FairnessParams(BaseModel):
    """Parameter bundle selecting a member of the fairness family."""

    model_config = ConfigDict(frozen=True)

    beta: float = Field(..., description="Generator exponent")
    r: float = Field(default=1.0, description="Growth exponent, f(1_n) = n^r")
    lambda_inv: float = Field(default=0.0, description="Degree of homogeneity of F")

    @field_validator("beta", "r", "lambda_inv")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("must be finite")
        return value

    @property
    def rho(self) -> float:
        """Partition weight exponent consistent with beta and r."""
        return 1.0 - self.beta * self.r

    @property
    def singular_case(self) -> SingularCase:
        """Singular point flag for beta."""
        if self.beta == 1:
            return SingularCase.BETA_ONE
        if self.beta == 0:
            return SingularCase.BETA_ZERO_LIMIT
        return SingularCase.NONE

    @property
    def is_singular(self) -> bool:
        return self.singular_case is not SingularCase.NONE


@dataclass(frozen=True)
class FairnessValue:
    """Signed extended-real fairness value."""

    value: float
    beta: float
    sign_convention: int
    singular_case: SingularCase = SingularCase.NONE

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    @property
    def is_neg_inf(self) -> bool:
        return self.value == -math.inf

    def __float__(self) -> float:
        return self.value
