"""Closed-form members of the fairness family.

All functions accept an AllocationVector or any sequence of non-negative
numbers. Values carry the sign(1 - beta) convention: positive below the
singular point beta = 1, negative above it.
"""

import math
from collections.abc import Sequence

import numpy as np
from scipy.special import entr, logsumexp

from src.errors import (
    InvalidAllocationError,
    ParameterDomainError,
    SingularParameterError,
)
from src.models.allocation import (
    AllocationVector,
    FairnessValue,
    LimitDirection,
    SingularCase,
    as_allocation,
)
from src.models.report import SuiteReport
from src.utils.sampling import sample_allocation, sample_bounded_spread

AllocationLike = AllocationVector | Sequence[float] | np.ndarray

# Largest |exponent * log share| evaluated with plain powers
LOG_SPACE_THRESHOLD = 600.0


def _sign(beta: float) -> float:
    return 1.0 if beta < 1 else -1.0


def _check_beta(beta: float) -> None:
    if math.isnan(beta) or math.isinf(beta):
        raise ParameterDomainError("beta", "must be finite; use fairness_ratio_limits for the infinite limits")
    if beta == 0:
        raise SingularParameterError("beta = 0 is a limit point; use fairness_entropy_limit")
    if beta == 1:
        raise SingularParameterError(
            "beta = 1 is discontinuous (+active users from below, -n from above); "
            "use fairness_one_sided_limits"
        )


def _log_power_sum(x: AllocationVector, exponent: float) -> float:
    """log of sum_i p_i^exponent over the positive shares of x."""
    values = np.sort(x.array[x.array > 0])
    shares = values / x.total
    largest_log = -math.log(shares[0])
    if abs(exponent) * largest_log > LOG_SPACE_THRESHOLD:
        return float(logsumexp(exponent * np.log(shares)))
    return math.log(math.fsum(shares**exponent))


def _entropy(x: AllocationVector) -> float:
    return math.fsum(entr(np.sort(x.shares)))


def fairness_unified(x: AllocationLike, beta: float) -> FairnessValue:
    """Evaluate f_beta(x) = sign(1-beta) * [sum_i p_i^(1-beta)]^(1/beta).

    Args:
        x: Allocation vector.
        beta: Generator exponent, not 0 or 1.

    Returns:
        Fairness value; -inf when beta > 1 and some user has nothing.
    """
    x = as_allocation(x)
    _check_beta(beta)
    sign = _sign(beta)
    if beta > 1 and x.has_zero:
        return FairnessValue(-math.inf, beta, -1)

    log_abs = _log_power_sum(x, 1.0 - beta) / beta
    return FairnessValue(sign * math.exp(log_abs), beta, int(sign))


def fairness_general(x: AllocationLike, beta: float, r: float) -> FairnessValue:
    """Evaluate f_{beta,r}(x), the member with f(1_n) = n^r.

    Args:
        x: Allocation vector.
        beta: Generator exponent.
        r: Growth exponent.

    Returns:
        Fairness value signed by sign(1 - beta*r).
    """
    x = as_allocation(x)
    if beta == 0 or not math.isfinite(beta):
        raise ParameterDomainError("beta", "must be finite and nonzero")
    if not math.isfinite(r):
        raise ParameterDomainError("r", "must be finite")
    product = beta * r
    if product == 0:
        raise SingularParameterError("beta * r = 0 is a limit point", parameter="r")
    if product == 1:
        raise SingularParameterError("beta * r = 1 is discontinuous", parameter="r")

    sign = _sign(product)
    if product > 1 and x.has_zero:
        return FairnessValue(-math.inf, beta, -1)
    log_abs = _log_power_sum(x, 1.0 - product) / beta
    return FairnessValue(sign * math.exp(log_abs), beta, int(sign))


def fairness_entropy_limit(x: AllocationLike) -> FairnessValue:
    """Evaluate the beta -> 0 limit exp(H(x / w(x))) with natural log."""
    x = as_allocation(x)
    return FairnessValue(math.exp(_entropy(x)), 0.0, 1, SingularCase.BETA_ZERO_LIMIT)


def fairness_ratio_limits(x: AllocationLike, direction: LimitDirection | str) -> FairnessValue:
    """Evaluate the beta -> +inf (max ratio) or beta -> -inf (min ratio) limit.

    Args:
        x: Allocation vector.
        direction: plus_inf or minus_inf.

    Returns:
        -max_i w/x_i for plus_inf (-inf if any zero), min_i w/x_i for minus_inf.
    """
    x = as_allocation(x)
    direction = LimitDirection(direction)
    total = x.total
    if direction is LimitDirection.PLUS_INF:
        if x.has_zero:
            return FairnessValue(-math.inf, math.inf, -1, SingularCase.PLUS_INF_LIMIT)
        return FairnessValue(-total / min(x.values), math.inf, -1, SingularCase.PLUS_INF_LIMIT)
    return FairnessValue(total / max(x.values), -math.inf, 1, SingularCase.MINUS_INF_LIMIT)


def fairness(x: AllocationLike, beta: float) -> FairnessValue:
    """Evaluate f_beta, routing beta = 0 and beta = +/-inf to their limits."""
    if beta == 0:
        return fairness_entropy_limit(x)
    if beta == math.inf:
        return fairness_ratio_limits(x, LimitDirection.PLUS_INF)
    if beta == -math.inf:
        return fairness_ratio_limits(x, LimitDirection.MINUS_INF)
    return fairness_unified(x, beta)


def log_abs_fairness(x: AllocationLike, beta: float) -> float:
    """log |f_beta(x)|, evaluated without forming f itself."""
    x = as_allocation(x)
    if beta == 0:
        return _entropy(x)
    _check_beta(beta)
    if beta > 1 and x.has_zero:
        return math.inf
    return _log_power_sum(x, 1.0 - beta) / beta


def fairness_one_sided_limits(x: AllocationLike) -> tuple[float, float]:
    """Limits of f_beta as beta approaches 1 from below and from above.

    Returns:
        (number of active users, -n or -inf if some user has nothing).
    """
    x = as_allocation(x)
    left = float(x.active_users)
    right = -math.inf if x.has_zero else -float(x.n)
    return left, right


def jain_generalized(x: AllocationLike, beta: float) -> float:
    """Generalized Jain's index J_beta(x) = f_beta(x) / n for beta <= 1.

    At beta = -1 this is the classical (sum x)^2 / (n * sum x^2).
    """
    x = as_allocation(x)
    if beta > 1:
        raise ParameterDomainError("beta", "generalized Jain's index is defined for beta <= 1")
    if beta == 1:
        raise SingularParameterError("beta = 1 is discontinuous; J tends to active users / n from below")
    return fairness(x, beta).value / x.n


def fairness_homogeneous(x: AllocationLike, beta: float, lambda_inv: float) -> float:
    """Evaluate F(x) = f_beta(x) * w(x)^lambda_inv, homogeneous of degree lambda_inv."""
    x = as_allocation(x)
    if not math.isfinite(lambda_inv):
        raise ParameterDomainError("lambda_inv", "must be finite")
    value = fairness_unified(x, beta).value
    if math.isinf(value):
        return value
    return value * x.total**lambda_inv


def homogeneous_pareto_preserving(beta: float, lambda_inv: float) -> bool:
    """Whether F with this degree ranks allocations like a Pareto-preserving objective.

    F orders allocations as lambda * l(f) + log w with lambda = sign(1-beta) / lambda_inv,
    which preserves Pareto dominance iff 0 < lambda <= |beta / (1 - beta)|.
    """
    if beta <= 0:
        raise ParameterDomainError("beta", "Pareto threshold is defined for beta > 0")
    _check_beta(beta)
    if lambda_inv == 0:
        return False
    lam = _sign(beta) / lambda_inv
    if lam <= 0:
        return False
    return lam <= abs(beta / (1.0 - beta)) * (1.0 + 1e-12)


def fairness_gradient(x: AllocationLike, beta: float) -> np.ndarray:
    """Analytic partial derivatives of f_beta at a strictly positive x.

    Args:
        x: Strictly positive allocation vector.
        beta: Generator exponent (0 allowed, 1 excluded).

    Returns:
        Array of df/dx_i.
    """
    x = as_allocation(x)
    if x.has_zero:
        raise InvalidAllocationError("gradient requires a strictly positive allocation")
    shares = x.shares
    total = x.total
    if beta == 0:
        entropy = _entropy(x)
        return math.exp(entropy) * (-np.log(shares) - entropy) / total

    _check_beta(beta)
    log_k = _log_power_sum(x, 1.0 - beta)
    value = _sign(beta) * math.exp(log_k / beta)
    relative = np.exp(-beta * np.log(shares) - log_k)
    return value * (1.0 - beta) / (beta * total) * (relative - 1.0)


def fairness_unified_batch(rows: np.ndarray, beta: float) -> np.ndarray:
    """Vectorized f_beta over the rows of a 2-D array (beta = 0 allowed).

    Rows must be non-negative with a positive sum.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if beta == 1 or not math.isfinite(beta):
        _check_beta(beta)
    totals = rows.sum(axis=1)
    if np.any(totals <= 0) or np.any(rows < 0):
        raise InvalidAllocationError("every row needs non-negative entries and a positive sum")

    shares = rows / totals[:, None]
    if beta == 0:
        return np.exp(entr(shares).sum(axis=1))

    positive = rows > 0
    log_shares = np.log(np.where(positive, shares, 1.0))
    terms = np.where(positive, (1.0 - beta) * log_shares, -np.inf)
    result = _sign(beta) * np.exp(logsumexp(terms, axis=1) / beta)
    if beta > 1:
        result[~positive.all(axis=1)] = -np.inf
    return result


def _relative_error(actual: float, expected: float) -> float:
    if actual == expected:
        return 0.0
    return abs(actual - expected) / max(abs(expected), 1e-300)


def special_case_suite(trials: int = 100, seed: int = 7) -> SuiteReport:
    """Check the classical special cases on random strictly positive vectors.

    Covers the Jain identity at beta = -1, the entropy limit, the max/min ratio
    limits, the r-reduction identity and the homogeneity degrees of f and F.
    """
    report = SuiteReport("core")
    rng = np.random.default_rng(seed)

    jain_worst = entropy_worst = reduction_worst = homogeneity_worst = 0.0
    sandwich_failures = limit_failures = 0

    for _ in range(trials):
        n = int(rng.integers(1, 9))
        x = AllocationVector.of(sample_allocation(rng, n))
        values = x.array

        classical = math.fsum(values) ** 2 / math.fsum(values**2)
        jain_worst = max(jain_worst, _relative_error(fairness_unified(x, -1).value, classical))

        entropy = fairness_entropy_limit(x).value
        entropy_worst = max(entropy_worst, _relative_error(fairness_unified(x, 1e-6).value, entropy))

        beta = float(rng.uniform(-3, 3))
        r = float(rng.uniform(0.25, 3))
        if abs(beta * r - 1) > 1e-3 and abs(beta * r) > 1e-3 and abs(beta) > 1e-3:
            general = fairness_general(x, beta, r).value
            reduced = fairness_general(x, beta * r, 1.0).value
            expected = math.copysign(abs(reduced) ** r, reduced)
            reduction_worst = max(reduction_worst, _relative_error(general, expected))

        for t in (1e-3, 1e3):
            scaled = x.scaled(t)
            homogeneity_worst = max(
                homogeneity_worst,
                _relative_error(fairness_unified(scaled, 2.0).value, fairness_unified(x, 2.0).value),
                _relative_error(
                    fairness_homogeneous(scaled, 0.5, 1.0),
                    t * fairness_homogeneous(x, 0.5, 1.0),
                ),
            )

        spread = AllocationVector.of(sample_bounded_spread(rng, n, 10.0))
        mins, maxs, total, size = min(spread.values), max(spread.values), spread.total, spread.n
        upper_ratio = total / mins
        lower_ratio = total / maxs
        for b in (50.0, 500.0):
            plus = -fairness_unified(spread, b).value
            minus = fairness_unified(spread, -b).value
            plus_ok = upper_ratio ** (1 - 1 / b) * (1 - 1e-12) <= plus <= size ** (1 / b) * upper_ratio ** (1 - 1 / b) * (1 + 1e-12)
            minus_ok = (
                (lower_ratio / size) ** (1 / b) * (1 - 1e-12)
                <= minus / lower_ratio
                <= lower_ratio ** (1 / b) * (1 + 1e-12)
            )
            if not (plus_ok and minus_ok):
                sandwich_failures += 1
            if b == 500.0 and (
                _relative_error(plus, upper_ratio) > 0.02 or _relative_error(minus, lower_ratio) > 0.02
            ):
                limit_failures += 1

    report.add("jain_identity", jain_worst <= 1e-12, beta=-1.0, worst_relative_error=jain_worst)
    report.add("entropy_limit", entropy_worst <= 1e-4, beta=1e-6, worst_relative_error=entropy_worst)
    report.add("ratio_limit_sandwich", sandwich_failures == 0, failures=sandwich_failures)
    report.add("ratio_limit_agreement", limit_failures == 0, beta=500.0, failures=limit_failures)
    report.add("reduction_identity", reduction_worst <= 1e-10, worst_relative_error=reduction_worst)
    report.add("homogeneity_degree", homogeneity_worst <= 1e-12, worst_relative_error=homogeneity_worst)

    for beta in (0.25, 0.5, 2.0, 3.0):
        threshold = abs(beta / (1 - beta))
        boundary = _sign(beta) / threshold
        agrees = homogeneous_pareto_preserving(beta, boundary) and not homogeneous_pareto_preserving(
            beta, boundary / 1.01
        )
        report.add("pareto_degree_flag", agrees, beta=beta, lambda_inv=boundary)

    return report
