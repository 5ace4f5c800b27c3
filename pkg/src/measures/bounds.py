"""Starvation counts, threshold resource, box-constraint bounds and beta sweeps."""

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.errors import InvalidAllocationError, ParameterDomainError, SingularParameterError
from src.measures.core import (
    AllocationLike,
    fairness,
    fairness_gradient,
    fairness_unified,
    fairness_unified_batch,
    log_abs_fairness,
)
from src.models.allocation import AllocationVector, as_allocation
from src.models.report import SuiteReport
from src.utils.sampling import sample_allocation

# Exhaustive enumeration above this size is refused
MAX_BRUTE_FORCE_USERS = 20

BOX_GAMMAS = (2.0, 4.0)
BOX_BETAS = (-2.0, -1.0, -0.5, 0.5, 2.0, 3.0)
THRESHOLD_BETAS = (-2.0, -1.0, -0.5, 0.5, 2.0, 3.0)
STARVATION_BETAS = (-4.0, -1.0, -0.5, 0.0, 0.5, 0.9)


class BoxConstraint(BaseModel):
    """Per-user bounds x_min <= x_i <= x_max."""

    model_config = ConfigDict(frozen=True)

    x_min: float = Field(..., gt=0)
    x_max: float = Field(..., gt=0)

    @model_validator(mode="after")
    def _ordered(self) -> "BoxConstraint":
        if self.x_min > self.x_max:
            raise ValueError(f"x_min = {self.x_min} exceeds x_max = {self.x_max}")
        return self

    @property
    def gamma(self) -> float:
        """Spread ratio x_max / x_min."""
        return self.x_max / self.x_min


@dataclass(frozen=True)
class StarvationBounds:
    """Upper bound on starved users and lower bound on the largest share."""

    beta: float
    fairness: float
    max_zero_users: float
    min_max_resource: float
    actual_zero_users: int
    actual_max: float
    rule: str = "finite"

    @property
    def holds(self) -> bool:
        tolerance = 1e-9 * max(1.0, self.actual_max)
        return (
            self.actual_zero_users <= self.max_zero_users + 1e-9
            and self.actual_max >= self.min_max_resource - tolerance
        )


@dataclass(frozen=True)
class ThresholdCheck:
    """Finite-difference confirmation of the threshold rule."""

    threshold: float
    derivatives: tuple[float, ...]
    agrees: bool


@dataclass(frozen=True)
class BoxLowerBound:
    """Closed-form lower bound of f over a box constraint."""

    bound: float
    mu_star: float
    n: int
    beta: float
    gamma: float
    degenerate: bool = False

    @property
    def per_user_bound(self) -> float:
        """Bound normalized by the number of users."""
        return self.bound / self.n


@dataclass
class BetaSweep:
    """Fairness of one allocation along a beta grid."""

    betas: list[float]
    values: list[float]
    label: str | None = None
    violations: list[int] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_frame(self) -> pd.DataFrame:
        """Plot data with columns beta and f."""
        return pd.DataFrame({"beta": self.betas, "f": self.values})


def starvation_bounds(x: AllocationLike, beta: float) -> StarvationBounds:
    """Bounds on starved users (n - f) and on the largest entry (w / f).

    For beta > 1 any starved user drives f to -inf, so the bound degenerates to
    that rule: no user can be starved while f is finite.
    """
    x = as_allocation(x)
    if beta == 1:
        raise SingularParameterError("beta = 1 is discontinuous")
    zeros = x.n - x.active_users
    largest = max(x.values)
    value = fairness(x, beta).value

    if beta > 1:
        if math.isinf(value):
            return StarvationBounds(beta, value, float(x.n - 1), x.total / x.n, zeros, largest, "neg_inf")
        return StarvationBounds(beta, value, 0.0, x.total / x.n, zeros, largest, "neg_inf")

    return StarvationBounds(beta, value, x.n - value, x.total / value, zeros, largest)


def threshold_resource(x: AllocationLike, beta: float, self_check: bool = True) -> float:
    """Level x_bar = (w / sum_j x_j^(1-beta))^(1/beta).

    Raising x_i increases f exactly when x_i < x_bar. The finite-difference
    self-check runs unless disabled and logs any disagreement.
    """
    x = as_allocation(x)
    if x.has_zero:
        raise InvalidAllocationError("threshold requires a strictly positive allocation")
    if beta in (0, 1) or not math.isfinite(beta):
        raise SingularParameterError("threshold is defined for finite beta outside {0, 1}")
    # w * K^(-1/beta) is w / |f|
    threshold = x.total * math.exp(-log_abs_fairness(x, beta))
    if self_check:
        check = threshold_self_check(x, beta, threshold)
        if not check.agrees:
            logger.warning(f"[THRESHOLD] finite differences disagree with x_bar = {threshold:.6g} for beta = {beta}")
    return threshold


def threshold_self_check(x: AllocationLike, beta: float, threshold: float | None = None) -> ThresholdCheck:
    """Central differences of f must have the sign of (x_bar - x_i)."""
    x = as_allocation(x)
    if threshold is None:
        threshold = threshold_resource(x, beta, self_check=False)
    values = x.array
    derivatives = []
    agrees = True
    for i, xi in enumerate(values):
        h = 1e-5 * xi
        up, down = values.copy(), values.copy()
        up[i] += h
        down[i] -= h
        derivative = (fairness_unified(up, beta).value - fairness_unified(down, beta).value) / (2 * h)
        derivatives.append(derivative)
        if abs(threshold - xi) > 1e-4 * threshold and np.sign(derivative) != np.sign(threshold - xi):
            agrees = False
    return ThresholdCheck(threshold, tuple(derivatives), agrees)


def box_mixture_value(mu: np.ndarray | float, gamma: float, beta: float, n: int) -> np.ndarray:
    """f of a box vertex mixing a fraction mu of users at x_max with the rest at x_min."""
    mu = np.asarray(mu, dtype=float)
    sign = 1.0 if beta < 1 else -1.0
    numerator = np.log(mu * gamma ** (1.0 - beta) + 1.0 - mu)
    denominator = (1.0 - beta) * np.log(mu * gamma + 1.0 - mu)
    return sign * n * np.exp((numerator - denominator) / beta)


def box_lower_bound(box: BoxConstraint, beta: float, n: int) -> BoxLowerBound:
    """Lower bound of f_beta(x) over x_min <= x_i <= x_max.

    Args:
        box: Box constraint.
        beta: Exponent outside {0, 1}.
        n: Number of users.

    Returns:
        Bound, the stationary mixture mu_star and a degeneracy flag when
        mu_star leaves (0, 1).
    """
    if beta in (0, 1) or not math.isfinite(beta):
        raise SingularParameterError("box bound is defined for finite beta outside {0, 1}")
    if n < 1:
        raise ParameterDomainError("n", "must be at least 1")
    gamma = box.gamma
    sign = 1.0 if beta < 1 else -1.0
    if gamma == 1:
        return BoxLowerBound(sign * n, math.nan, n, beta, gamma)

    power = gamma ** (1.0 - beta)
    mu_star = (gamma - power - beta * (gamma - 1.0)) / (beta * (gamma - 1.0) * (power - 1.0))

    candidates = [0.0, 1.0]
    degenerate = not 0.0 < mu_star < 1.0
    if degenerate:
        logger.warning(f"[BOX] mu* = {mu_star:.6g} outside (0, 1) for gamma = {gamma}, beta = {beta}")
        candidates.append(min(max(mu_star, 0.0), 1.0))
    else:
        candidates.append(mu_star)

    bound = float(np.min(box_mixture_value(np.array(candidates), gamma, beta, n)))
    return BoxLowerBound(bound, mu_star, n, beta, gamma, degenerate)


def box_brute_force_minimum(box: BoxConstraint, beta: float, n: int) -> float:
    """Minimum of f_beta over all 2^n assignments of x_min / x_max."""
    if not 1 <= n <= MAX_BRUTE_FORCE_USERS:
        raise ParameterDomainError("n", f"exhaustive enumeration supports 1..{MAX_BRUTE_FORCE_USERS} users")
    masks = np.arange(2**n, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(n)) & 1
    rows = box.x_min + bits * (box.x_max - box.x_min)
    return float(fairness_unified_batch(rows, beta).min())


def box_relaxation_gap(box: BoxConstraint, beta: float, n: int) -> float:
    """Distance between the best mixture on the grid mu = k/n and the continuous bound."""
    grid = np.arange(n + 1) / n
    discrete = float(np.min(box_mixture_value(grid, box.gamma, beta, n)))
    return discrete - box_lower_bound(box, beta, n).bound


def beta_monotonicity_sweep(x: AllocationLike, beta_grid: Sequence[float]) -> BetaSweep:
    """Evaluate f along a sorted grid and record monotonicity violations.

    f must be nondecreasing on (-inf, 1) and nonincreasing on (1, inf).
    beta = 0 is evaluated with the entropy limit; beta = 1 is not allowed.

    Returns:
        Sweep with plot data and the indices where the order breaks.
    """
    x = as_allocation(x)
    betas = [float(b) for b in beta_grid]
    if any(later < earlier for earlier, later in zip(betas, betas[1:])):
        raise ParameterDomainError("beta_grid", "must be sorted ascending")
    if 1.0 in betas:
        raise SingularParameterError("beta = 1 must be removed from the grid")

    values = [fairness(x, beta).value for beta in betas]
    violations = []
    for k in range(1, len(betas)):
        previous, current = values[k - 1], values[k]
        if (betas[k - 1] < 1) != (betas[k] < 1) or previous == current:
            continue
        slack = 1e-12 * max(1.0, abs(previous)) if math.isfinite(previous) else 0.0
        if betas[k] < 1 and current < previous - slack:
            violations.append(k)
        if betas[k] > 1 and current > previous + slack:
            violations.append(k)
    return BetaSweep(betas, values, x.label, violations)


def bounds_suite(trials: int = 10_000, seed: int = 7) -> SuiteReport:
    """Random checks of the starvation bounds, threshold rule, box bound and sweeps."""
    report = SuiteReport("bounds")
    rng = np.random.default_rng(seed)

    starvation_failures = {beta: 0 for beta in STARVATION_BETAS}
    for trial in range(trials):
        beta = STARVATION_BETAS[trial % len(STARVATION_BETAS)]
        x = sample_allocation(rng, int(rng.integers(1, 11)), zero_prob=0.3)
        if not starvation_bounds(x, beta).holds:
            starvation_failures[beta] += 1
    for beta, failures in starvation_failures.items():
        report.add("starvation_bounds", failures == 0, beta=beta, failures=failures)

    for beta in THRESHOLD_BETAS:
        sign_failures = 0
        worst_gradient = 0.0
        for _ in range(max(1, trials // 100)):
            x = AllocationVector.of(rng.uniform(0.2, 5.0, size=int(rng.integers(2, 8))))
            check = threshold_self_check(x, beta)
            sign_failures += not check.agrees
            analytic = fairness_gradient(x, beta)
            scale = abs(fairness_unified(x, beta).value) / x.total
            errors = np.abs(np.asarray(check.derivatives) - analytic) / np.maximum(np.abs(analytic), scale)
            worst_gradient = max(worst_gradient, float(errors.max()))
        report.add("threshold_sign", sign_failures == 0, beta=beta, failures=sign_failures)
        report.add("fairness_gradient", worst_gradient <= 1e-6, beta=beta, worst_relative_error=worst_gradient)

    for gamma in BOX_GAMMAS:
        box = BoxConstraint(x_min=1.0, x_max=gamma)
        for beta in BOX_BETAS:
            failures = 0
            for n in range(2, 13):
                bound = box_lower_bound(box, beta, n).bound
                brute = box_brute_force_minimum(box, beta, n)
                gap = box_relaxation_gap(box, beta, n)
                slack = 1e-9 * abs(brute)
                if bound > brute + slack or brute - bound > gap + slack:
                    failures += 1
            report.add("box_lower_bound", failures == 0, beta=beta, gamma=gamma, failures=failures)

    grid = [b for b in np.round(np.arange(-10.0, 5.0001, 0.25), 10) if b != 1.0]
    sweep_failures = 0
    for _ in range(max(1, trials // 10)):
        x = sample_allocation(rng, int(rng.integers(2, 8)), zero_prob=0.2)
        sweep_failures += not beta_monotonicity_sweep(x, grid).passed
    report.add("beta_monotonicity", sweep_failures == 0, failures=sweep_failures)
    return report
