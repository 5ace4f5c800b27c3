"""Alpha-fair utility, its fairness x efficiency factorization and the tradeoff objective.

The objective Phi_lambda(x) = lambda * l(f_beta(x)) + l(w(x)), with
l(y) = sign(y) * log|y|, scalarizes fairness against throughput.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from src.errors import (
    DegenerateDirectionError,
    InvalidAllocationError,
    ParameterDomainError,
    SingularParameterError,
)
from src.measures.core import (
    AllocationLike,
    fairness_homogeneous,
    log_abs_fairness,
)
from src.models.allocation import AllocationVector, as_allocation
from src.models.report import SuiteReport
from src.utils.sampling import sample_allocation, sample_dominating

COUNTEREXAMPLE_BETAS = (1.5, 2.0, 3.0)
COUNTEREXAMPLE_SIZES = (2, 4, 8)


class UtilityParams(BaseModel):
    """Alpha-fair utility exponent and tradeoff weight."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    alpha: float = Field(..., ge=0)
    lam: float = Field(default=0.0, ge=0, alias="lambda")


@dataclass(frozen=True)
class GradientReport:
    """Utility gradient, fairness direction and their reward ratio."""

    alpha: float
    gradient: np.ndarray
    eta: np.ndarray
    ratio: float

    @property
    def eta_sum(self) -> float:
        return float(self.eta.sum())


class Factorization(NamedTuple):
    """U_beta(x) split as |f_beta(x)|^beta * U_beta(w(x))."""

    fairness_component: float
    efficiency_component: float

    @property
    def product(self) -> float:
        return self.fairness_component * self.efficiency_component


def _utility_scalar(value: float, alpha: float) -> float:
    if alpha == 1:
        return math.log(value) if value > 0 else -math.inf
    if value == 0 and alpha > 1:
        return -math.inf
    return value ** (1.0 - alpha) / (1.0 - alpha)


def alpha_utility(x: AllocationLike, alpha: float) -> float:
    """Sum of U_alpha(x_i) with U_alpha(y) = y^(1-alpha) / (1-alpha), log y at alpha = 1.

    Returns:
        Total utility; -inf for alpha >= 1 with a zero entry.
    """
    x = as_allocation(x)
    if not alpha >= 0 or not math.isfinite(alpha):
        raise ParameterDomainError("alpha", "must be finite and non-negative")
    if alpha >= 1 and x.has_zero:
        return -math.inf
    values = x.array
    if alpha == 1:
        return math.fsum(np.log(values))
    return math.fsum(values ** (1.0 - alpha)) / (1.0 - alpha)


def _check_tradeoff_beta(beta: float) -> None:
    if not math.isfinite(beta) or beta <= 0:
        raise ParameterDomainError("beta", "must lie in (0, 1) or (1, inf)")
    if beta == 1:
        raise SingularParameterError("beta = 1 has an unbounded Pareto threshold")


def factorize(x: AllocationLike, beta: float) -> Factorization:
    """Split U_beta(x) into a fairness and an efficiency component.

    Args:
        x: Allocation; strictly positive when beta > 1.
        beta: Exponent in (0, 1) or (1, inf).

    Returns:
        (|f_beta(x)|^beta, U_beta(w(x))).
    """
    x = as_allocation(x)
    _check_tradeoff_beta(beta)
    if beta > 1 and x.has_zero:
        raise InvalidAllocationError("factorization for beta > 1 needs strictly positive entries")
    fairness_component = math.exp(beta * log_abs_fairness(x, beta))
    return Factorization(fairness_component, _utility_scalar(x.total, beta))


def utility_ell(y: float) -> float:
    """l(y) = sign(y) * log|y|."""
    if y == 0 or math.isnan(y):
        raise ParameterDomainError("y", "l(y) is undefined at 0")
    if math.isinf(y):
        return y
    return math.copysign(math.log(abs(y)), y)


def tradeoff_objective(x: AllocationLike, beta: float, lam: float) -> float:
    """Phi_lambda(x) = lambda * l(f_beta(x)) + log w(x)."""
    x = as_allocation(x)
    _check_tradeoff_beta(beta)
    if not lam >= 0 or not math.isfinite(lam):
        raise ParameterDomainError("lambda", "must be finite and non-negative")
    efficiency = math.log(x.total)
    if lam == 0:
        return efficiency
    log_abs = log_abs_fairness(x, beta)
    if math.isinf(log_abs):
        return -math.inf
    sign = 1.0 if beta < 1 else -1.0
    return lam * sign * log_abs + efficiency


def tradeoff_gap(x: AllocationLike, x_prime: AllocationLike, beta: float, lam: float) -> float:
    """Phi_lambda(x') - Phi_lambda(x) without cancellation.

    Uses Phi = (sign/beta) * lam * log S + (1 - lam |1-beta| / beta) * log w with
    S = sum_i x_i^(1-beta), and differences S' - S term by term.
    """
    x = as_allocation(x)
    x_prime = as_allocation(x_prime)
    _check_tradeoff_beta(beta)
    if x.n != x_prime.n:
        raise ParameterDomainError("x_prime", "allocations must have equal length")
    if x.has_zero or x_prime.has_zero:
        return tradeoff_objective(x_prime, beta, lam) - tradeoff_objective(x, beta, lam)

    exponent = 1.0 - beta
    terms = x.array**exponent
    change = math.fsum(x_prime.array**exponent - terms)
    power_sum = math.fsum(terms)
    sign = 1.0 if beta < 1 else -1.0
    efficiency_weight = 1.0 - lam * abs(exponent) / beta
    return (
        sign * lam / beta * math.log1p(change / power_sum)
        + efficiency_weight * math.log1p((x_prime.total - x.total) / x.total)
    )


def tradeoff_gradient(x: AllocationLike, beta: float, lam: float) -> np.ndarray:
    """Gradient of Phi_lambda at a strictly positive x."""
    x = as_allocation(x)
    _check_tradeoff_beta(beta)
    if x.has_zero:
        raise InvalidAllocationError("gradient requires a strictly positive allocation")
    shares = x.shares
    total = x.total
    log_k = beta * log_abs_fairness(x, beta)
    relative = np.exp(-beta * np.log(shares) - log_k)
    fairness_part = abs(1.0 - beta) / (beta * total) * (relative - 1.0)
    return lam * fairness_part + 1.0 / total


def pareto_lambda_max(beta: float) -> float:
    """Largest lambda for which maximizing Phi_lambda stays Pareto optimal: |beta / (1 - beta)|."""
    _check_tradeoff_beta(beta)
    return abs(beta / (1.0 - beta))


def counterexample_delta(beta: float, lam: float, n: int) -> float:
    """Relative increment of the richest user that lowers Phi despite Pareto improving.

    Uses delta = A / 2 with A = (1 + n^-beta)^(lam / (lam (beta - 1) - beta)); any
    delta > A - 1 works, so delta = 2 (A - 1) backs it up when A >= 2.
    """
    _validate_counterexample(beta, lam, n)
    if beta < 1:
        return _small_delta_search(beta, lam, n)
    a = (1.0 + n ** (-beta)) ** (lam / (lam * (beta - 1.0) - beta))
    delta = a / 2.0
    x, x_prime = _counterexample_pair(n, delta)
    if tradeoff_gap(x, x_prime, beta, lam) < 0:
        return delta
    fallback = 2.0 * (a - 1.0)
    logger.warning(f"[PARETO] delta = {delta:.6g} does not lower Phi, using {fallback:.6g}")
    return fallback


def _validate_counterexample(beta: float, lam: float, n: int) -> None:
    threshold = pareto_lambda_max(beta)
    if not lam > threshold:
        raise ParameterDomainError("lambda", f"must exceed the Pareto threshold {threshold:g}")
    if n < 2:
        raise ParameterDomainError("n", "must be at least 2")


def _counterexample_pair(n: int, delta: float) -> tuple[AllocationVector, AllocationVector]:
    base = np.ones(n + 1)
    base[-1] = n
    improved = base.copy()
    improved[-1] = n + delta * base.sum()
    return AllocationVector.of(base), AllocationVector.of(improved)


def _small_delta_search(beta: float, lam: float, n: int) -> float:
    """For beta < 1 only small increments can lower Phi; scan a geometric grid."""
    for delta in np.geomspace(1e-8, 1.0, 81):
        x, x_prime = _counterexample_pair(n, float(delta))
        if tradeoff_gap(x, x_prime, beta, lam) < 0:
            return float(delta)
    raise ParameterDomainError("n", f"no violating increment for n = {n}; increase n")


def pareto_counterexample(beta: float, lam: float, n: int) -> tuple[AllocationVector, AllocationVector]:
    """Pair (x, x') where x' Pareto dominates x yet Phi_lambda(x') < Phi_lambda(x).

    Args:
        beta: Exponent in (0, 1) or (1, inf).
        lam: Tradeoff weight above pareto_lambda_max(beta).
        n: Number of unit users; x = [1, ..., 1, n] has n + 1 entries.

    Returns:
        (x, x') with x' differing from x only in the last entry.
    """
    delta = counterexample_delta(beta, lam, n)
    return _counterexample_pair(n, delta)


def reward_ratio(x: AllocationLike, alpha: float) -> GradientReport:
    """Fairness-direction derivative of U_alpha relative to its equal-growth derivative.

    Args:
        x: Strictly positive, unequal allocation.
        alpha: Utility exponent, alpha >= 0.

    Returns:
        Gradient x^-alpha, direction eta = 1/n - x/w and the ratio
        <grad, eta/|eta|> / <grad, 1/sqrt(n)>.
    """
    x = as_allocation(x)
    if not alpha >= 0 or not math.isfinite(alpha):
        raise ParameterDomainError("alpha", "must be finite and non-negative")
    if x.has_zero:
        raise InvalidAllocationError("reward ratio requires a strictly positive allocation")
    eta = 1.0 / x.n - x.shares
    norm = float(np.linalg.norm(eta))
    if x.is_equal or norm == 0:
        raise DegenerateDirectionError("eta degenerate: the allocation is already equal")

    gradient = x.array ** (-alpha)
    # Centering makes the numerator vanish exactly when the gradient is constant
    centered = gradient - gradient.mean()
    along_eta = math.fsum(centered * eta) / norm
    along_equal = math.fsum(gradient) / math.sqrt(x.n)
    return GradientReport(alpha, gradient, eta, along_eta / along_equal)


def alpha_suite(
    beta_grid: Sequence[float] = (0.25, 0.5, 0.75, 1.5, 2.0, 3.0, 5.0),
    trials: int = 1_000,
    seed: int = 7,
) -> SuiteReport:
    """Random checks of the factorization, Pareto threshold and reward ratio."""
    report = SuiteReport("alpha")
    rng = np.random.default_rng(seed)

    worst_factor = 0.0
    for _ in range(trials):
        beta = float(rng.uniform(0.05, 5.0))
        if abs(beta - 1) < 1e-3:
            continue
        x = AllocationVector.of(sample_allocation(rng, int(rng.integers(1, 9))))
        parts = factorize(x, beta)
        utility = alpha_utility(x, beta)
        worst_factor = max(worst_factor, abs(parts.product - utility) / max(1.0, abs(utility)))
    report.add("factorization", worst_factor <= 1e-9, worst_error=worst_factor)

    for beta in beta_grid:
        lam = pareto_lambda_max(beta) * (1 - 1e-6)
        violations = 0
        for _ in range(trials):
            x = sample_allocation(rng, int(rng.integers(2, 9)))
            x_prime = sample_dominating(rng, x)
            if not tradeoff_gap(x, x_prime, beta, lam) > 0:
                violations += 1
        report.add("pareto_preserved", violations == 0, beta=beta, lam=lam, violations=violations)

        utility_degree = (1.0 - beta) / beta
        worst_identity = 0.0
        for _ in range(20):
            x = AllocationVector.of(sample_allocation(rng, int(rng.integers(1, 7))))
            homogeneous = fairness_homogeneous(x, beta, utility_degree)
            expected = math.copysign(((1.0 - beta) * alpha_utility(x, beta)) ** (1.0 / beta), 1.0 - beta)
            worst_identity = max(worst_identity, abs(homogeneous - expected) / abs(expected))
        report.add("utility_member_identity", worst_identity <= 1e-9, beta=beta, worst_relative_error=worst_identity)

    for beta in COUNTEREXAMPLE_BETAS:
        lam = 1.5 * pareto_lambda_max(beta)
        for n in COUNTEREXAMPLE_SIZES:
            x, x_prime = pareto_counterexample(beta, lam, n)
            dominates = all(b >= a for a, b in zip(x.values, x_prime.values)) and x_prime.total > x.total
            gap = tradeoff_gap(x, x_prime, beta, lam)
            report.add("pareto_violated", dominates and gap < 0, beta=beta, n=n, lam=lam, gap=gap)

    _ratio_checks(report, rng, trials=min(trials, 100))
    _gradient_checks(report, rng)
    return report


def _ratio_checks(report: SuiteReport, rng: np.random.Generator, trials: int) -> None:
    alphas = np.linspace(0.0, 8.0, 50)
    non_monotone = 0
    nonzero_at_zero = 0
    for _ in range(trials):
        x = sample_allocation(rng, int(rng.integers(2, 9)))
        ratios = [reward_ratio(x, float(a)).ratio for a in alphas]
        if ratios[0] != 0.0:
            nonzero_at_zero += 1
        if any(later < earlier - 1e-10 for earlier, later in zip(ratios, ratios[1:])):
            non_monotone += 1
    report.add("reward_ratio_zero_at_alpha_zero", nonzero_at_zero == 0, failures=nonzero_at_zero)
    report.add("reward_ratio_monotone", non_monotone == 0, failures=non_monotone, trials=trials)

    # Fairer fixed allocations earn pointwise lower ratios
    ladder = ([1.0, 1.1], [1.0, 3.0], [1.0, 10.0])
    ordered = all(
        reward_ratio(ladder[0], float(a)).ratio
        <= reward_ratio(ladder[1], float(a)).ratio
        <= reward_ratio(ladder[2], float(a)).ratio
        for a in alphas[1:]
    )
    report.add("reward_ratio_fairness_order", ordered)


def _gradient_checks(report: SuiteReport, rng: np.random.Generator, trials: int = 50) -> None:
    worst_utility = worst_phi = 0.0
    for _ in range(trials):
        x = rng.uniform(0.5, 5.0, size=int(rng.integers(2, 6)))
        alpha = float(rng.uniform(0.0, 4.0))
        if abs(alpha - 1) < 1e-2:
            alpha = 1.0
        beta = float(rng.choice([0.5, 2.0, 3.0]))
        lam = float(rng.uniform(0.0, 3.0))
        for i in range(len(x)):
            h = 1e-5 * x[i]
            up, down = x.copy(), x.copy()
            up[i] += h
            down[i] -= h
            numeric = (alpha_utility(up, alpha) - alpha_utility(down, alpha)) / (2 * h)
            analytic = x[i] ** (-alpha)
            worst_utility = max(worst_utility, abs(numeric - analytic) / abs(analytic))

            numeric_phi = (tradeoff_objective(up, beta, lam) - tradeoff_objective(down, beta, lam)) / (2 * h)
            analytic_phi = tradeoff_gradient(x, beta, lam)[i]
            worst_phi = max(worst_phi, abs(numeric_phi - analytic_phi) / max(abs(analytic_phi), 1e-3))
    report.add("utility_gradient", worst_utility <= 1e-6, worst_relative_error=worst_utility)
    report.add("tradeoff_gradient", worst_phi <= 1e-6, worst_relative_error=worst_phi)
