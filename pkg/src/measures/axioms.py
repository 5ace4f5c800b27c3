"""Hierarchical construction of fairness and numeric axiom checks.

A vector split into segments is evaluated as the fairness of the segment
totals times a weighted generator mean of the segment fairness values,
with weights proportional to w(segment)^rho.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import logsumexp

from src.errors import (
    InvalidAllocationError,
    ParameterDomainError,
    PartitionMismatchError,
)
from src.measures.core import (
    AllocationLike,
    fairness,
    fairness_gradient,
    fairness_homogeneous,
)
from src.models.allocation import AllocationVector, FairnessValue, as_allocation
from src.models.report import CheckStatus, SuiteReport

# Consistency tolerance between the generator's rho and 1 - beta
_RHO_TOL = 1e-12


class GeneratorKind(Enum):
    """Generator function family."""

    POWER = "power"
    LOGARITHM = "logarithm"


@dataclass(frozen=True)
class GeneratorSpec:
    """Generator g of the mean used in the recursion, plus its weight exponent."""

    kind: GeneratorKind
    rho: float
    beta: float | None = None

    def __post_init__(self) -> None:
        if self.kind is GeneratorKind.POWER and (self.beta is None or self.beta == 0):
            raise ParameterDomainError("beta", "power generator requires a nonzero exponent")
        if not math.isfinite(self.rho):
            raise ParameterDomainError("rho", "must be finite")

    @classmethod
    def power(cls, beta: float, rho: float | None = None) -> "GeneratorSpec":
        """Power generator g(y) = |y|^beta; rho defaults to 1 - beta."""
        return cls(GeneratorKind.POWER, 1.0 - beta if rho is None else rho, beta)

    @classmethod
    def logarithm(cls, rho: float = 1.0) -> "GeneratorSpec":
        """Logarithmic generator g(y) = log y."""
        return cls(GeneratorKind.LOGARITHM, rho)


@dataclass(frozen=True)
class Partition:
    """Ordered split of a vector into contiguous non-empty segments."""

    segments: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        segments = tuple(tuple(float(v) for v in segment) for segment in self.segments)
        object.__setattr__(self, "segments", segments)
        if len(segments) < 2:
            raise ParameterDomainError("segments", "a partition needs at least two segments")
        if any(len(segment) == 0 for segment in segments):
            raise ParameterDomainError("segments", "every segment must be non-empty")
        # Validate the parent as an allocation
        as_allocation(self.concatenated)

    @classmethod
    def split(cls, x: AllocationLike, cuts: Sequence[int]) -> "Partition":
        """Split x at the given cut indices."""
        values = as_allocation(x).values
        bounds = [0, *cuts, len(values)]
        return cls(tuple(values[lo:hi] for lo, hi in zip(bounds, bounds[1:])))

    @classmethod
    def random(cls, x: AllocationLike, rng: np.random.Generator) -> "Partition":
        """Random two-way partition of a random permutation of x."""
        values = np.asarray(as_allocation(x).values)
        if len(values) < 2:
            raise ParameterDomainError("x", "need at least two users to partition")
        permuted = values[rng.permutation(len(values))]
        cut = int(rng.integers(1, len(values)))
        return cls((tuple(permuted[:cut]), tuple(permuted[cut:])))

    @property
    def concatenated(self) -> np.ndarray:
        return np.concatenate([np.asarray(segment) for segment in self.segments])

    @property
    def segment_sums(self) -> list[float]:
        return [math.fsum(segment) for segment in self.segments]


def partition_weights(segment_sums: Sequence[float], rho: float) -> list[float]:
    """Weights s_i = w_i^rho / sum_j w_j^rho.

    Args:
        segment_sums: Positive segment totals.
        rho: Weight exponent; rho = 0 gives uniform weights.

    Returns:
        Positive weights summing to one.
    """
    sums = np.asarray(segment_sums, dtype=float)
    if sums.size == 0 or np.any(~np.isfinite(sums)) or np.any(sums <= 0):
        raise ParameterDomainError("segment_sums", "every segment sum must be positive and finite")
    log_terms = rho * np.log(sums)
    weights = np.exp(log_terms - logsumexp(log_terms))
    return (weights / weights.sum()).tolist()


def generator_mean(values: Sequence[float], weights: Sequence[float], generator: GeneratorSpec) -> float:
    """Weighted quasi-arithmetic mean g^-1(sum_i s_i g(|v_i|))."""
    magnitudes = np.abs(np.asarray(values, dtype=float))
    weights = np.asarray(weights, dtype=float)
    if generator.kind is GeneratorKind.LOGARITHM:
        return math.exp(math.fsum(weights * np.log(magnitudes)))
    beta = generator.beta
    log_terms = np.log(weights) + beta * np.log(magnitudes)
    return math.exp(float(logsumexp(log_terms)) / beta)


def fairness_recursive(p: Partition, gen: GeneratorSpec, beta: float) -> FairnessValue:
    """Two-level composition of fairness over a partition.

    Args:
        p: Partition of the allocation.
        gen: Generator; power with rho = 1 - beta, or logarithm with rho = 1 at beta = 0.
        beta: Exponent of the family member.

    Returns:
        f(w(x^1), ..., w(x^k)) * mean_i f(x^i).
    """
    if beta == 0:
        if gen.kind is not GeneratorKind.LOGARITHM:
            raise PartitionMismatchError("beta = 0 composes with the logarithmic generator")
    elif gen.kind is not GeneratorKind.POWER or gen.beta != beta:
        raise PartitionMismatchError(f"generator exponent {gen.beta} does not match beta = {beta}")
    if abs(gen.rho - (1.0 - beta)) > _RHO_TOL:
        raise PartitionMismatchError(
            f"rho = {gen.rho} differs from 1 - beta = {1.0 - beta}: partition irrelevance not guaranteed"
        )

    parent = as_allocation(p.concatenated)
    if beta > 1 and parent.has_zero:
        return FairnessValue(-math.inf, beta, -1)

    # Zero-sum segments carry no weight and are dropped
    segments = [segment for segment, total in zip(p.segments, p.segment_sums) if total > 0]
    if len(segments) == 1:
        return fairness(segments[0], beta)

    sums = [math.fsum(segment) for segment in segments]
    top = fairness(sums, beta)
    inner = [fairness(segment, beta).value for segment in segments]
    weights = partition_weights(sums, gen.rho)
    value = top.value * generator_mean(inner, weights, gen)
    return FairnessValue(value, beta, top.sign_convention, top.singular_case)


def direct_product(y: AllocationLike, z: AllocationLike) -> AllocationVector:
    """Vector of all products y_i * z_j."""
    y = as_allocation(y)
    z = as_allocation(z)
    return AllocationVector.of(np.outer(y.array, z.array).ravel())


def fairness_log_generator(x: AllocationLike, r: float = 1.0) -> float:
    """Measure generated by the logarithm: w^r * prod_i x_i^(-r x_i / w)."""
    x = as_allocation(x)
    if x.has_zero:
        raise InvalidAllocationError("logarithmic generator requires strictly positive entries")
    values = x.array
    total = x.total
    exponent = math.log(total) - math.fsum(values / total * np.log(values))
    return math.exp(r * exponent)


def _relative_gap(a: float, b: float) -> float:
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def verify_axioms(
    x_samples: Sequence[AllocationLike],
    beta_grid: Sequence[float],
    tol: float = 1e-8,
    lambda_inv: float = 1.0,
    seed: int = 7,
    saturation_max_n: int = 10_000,
) -> SuiteReport:
    """Numerically check the axioms for every beta of the grid.

    Failures are report entries; nothing is raised for a failing property.

    Args:
        x_samples: Allocation vectors to test.
        beta_grid: Exponents to test; beta = 1 is flagged and skipped.
        tol: Relative tolerance.
        lambda_inv: Degree of homogeneity of F for the splitting checks.
        seed: Seed for partitions and splitting vectors.
        saturation_max_n: Largest n in the saturation check.

    Returns:
        Report with one entry per (axiom, beta).
    """
    if tol <= 0:
        raise ParameterDomainError("tol", "must be positive")
    samples = [as_allocation(x) for x in x_samples]
    report = SuiteReport("axioms")

    for index, beta in enumerate(beta_grid):
        if beta == 1:
            report.flag(
                "discontinuity",
                CheckStatus.FLAGGED,
                beta=beta,
                detail="f jumps from +active users to -n at beta = 1",
            )
            for name in ("continuity", "homogeneity", "saturation", "partition_irrelevance"):
                report.flag(name, CheckStatus.SKIPPED, beta=beta, detail="singular point")
            continue

        rng = np.random.default_rng([seed, index])
        _check_continuity(report, samples, beta, tol)
        _check_homogeneity(report, samples, beta, tol)
        _check_saturation(report, beta, saturation_max_n)
        _check_partition_irrelevance(report, samples, beta, tol, rng)
        _check_symmetric_monotonicity(report, beta, tol)
        if beta != 0:
            _check_splitting(report, beta, lambda_inv, tol, rng)
            _check_homogeneous_degree(report, samples, beta, lambda_inv, tol)

    return report


def _check_continuity(report: SuiteReport, samples: list[AllocationVector], beta: float, tol: float) -> None:
    """|f(x + d e_i) - f(x)| <= L d with L taken from the analytic gradient."""
    worst = 0.0
    checked = 0
    for x in samples:
        if x.has_zero:
            continue
        base = fairness(x, beta).value
        step = 1e-7 * x.total
        gradient = np.abs(fairness_gradient(x, beta))
        for i in range(x.n):
            moved = x.array
            moved[i] += step
            lipschitz = max(gradient[i], abs(fairness_gradient(moved, beta)[i]))
            change = abs(fairness(moved, beta).value - base)
            allowed = lipschitz * step * (1 + 1e-3) + tol * max(1.0, abs(base))
            worst = max(worst, change / allowed)
            checked += 1
    report.add("continuity", worst <= 1.0, beta=beta, checked=checked, worst_ratio=worst)


def _check_homogeneity(report: SuiteReport, samples: list[AllocationVector], beta: float, tol: float) -> None:
    worst = 0.0
    for x in samples:
        base = fairness(x, beta).value
        for t in (1e-6, 1e-3, 1e3, 1e6):
            worst = max(worst, _relative_gap(fairness(x.scaled(t), beta).value, base))
    report.add("homogeneity", worst <= tol, beta=beta, worst_relative_error=worst)


def _check_saturation(report: SuiteReport, beta: float, max_n: int) -> None:
    """f(1_{n+1}) / f(1_n) tends to one."""
    sizes = sorted({int(v) for v in np.unique(np.geomspace(1, max_n, 25).round())})
    worst = 0.0
    previous_gap = math.inf
    shrinking = True
    for n in sizes:
        ratio = fairness(np.ones(n + 1), beta).value / fairness(np.ones(n), beta).value
        gap = abs(ratio - 1)
        worst = max(worst, gap * n / 2)
        shrinking = shrinking and gap <= previous_gap + 1e-15
        previous_gap = gap
    report.add("saturation", worst < 1.0 and shrinking, beta=beta, largest_n=sizes[-1], final_gap=previous_gap)


def _check_partition_irrelevance(
    report: SuiteReport,
    samples: list[AllocationVector],
    beta: float,
    tol: float,
    rng: np.random.Generator,
) -> None:
    generator = GeneratorSpec.logarithm() if beta == 0 else GeneratorSpec.power(beta)
    worst = 0.0
    checked = 0
    for x in samples:
        if x.n < 2:
            continue
        partition = Partition.random(x, rng)
        if min(partition.segment_sums) <= 0:
            continue
        direct = fairness(partition.concatenated, beta).value
        recursive = fairness_recursive(partition, generator, beta).value
        worst = max(worst, _relative_gap(recursive, direct))
        checked += 1
    report.add("partition_irrelevance", worst <= tol, beta=beta, checked=checked, worst_relative_error=worst)


def _check_symmetric_monotonicity(report: SuiteReport, beta: float, tol: float) -> None:
    """f(theta, 1 - theta) grows as theta moves toward 1/2."""
    thetas = np.linspace(0.01, 0.5, 50)
    values = [fairness([theta, 1 - theta], beta).value for theta in thetas]
    drops = [
        earlier - later
        for earlier, later in zip(values, values[1:])
        if later < earlier - tol * max(1.0, abs(earlier))
    ]
    report.add("two_user_monotonicity", not drops, beta=beta, violations=len(drops))


def _check_splitting(
    report: SuiteReport,
    beta: float,
    lambda_inv: float,
    tol: float,
    rng: np.random.Generator,
    trials: int = 20,
) -> None:
    """F(x_1 y^1, x_2 y^2) = F(x) * mean(|F(y^1)|, |F(y^2)|) for w(y^1) = w(y^2)."""
    worst = 0.0
    for _ in range(trials):
        x = rng.uniform(0.1, 10.0, size=2)
        common = rng.uniform(0.5, 5.0)
        y1 = rng.dirichlet(np.ones(int(rng.integers(1, 5)))) * common
        y2 = rng.dirichlet(np.ones(int(rng.integers(1, 5)))) * common
        y1, y2 = np.maximum(y1, 1e-9), np.maximum(y2, 1e-9)
        y2 *= y1.sum() / y2.sum()

        joined = np.concatenate([x[0] * y1, x[1] * y2])
        left = fairness_homogeneous(joined, beta, lambda_inv)
        weights = partition_weights(x, 1.0 - beta)
        inner = [fairness_homogeneous(y1, beta, lambda_inv), fairness_homogeneous(y2, beta, lambda_inv)]
        right = fairness_homogeneous(x, beta, lambda_inv) * generator_mean(inner, weights, GeneratorSpec.power(beta))
        worst = max(worst, _relative_gap(left, right))
    report.add("splitting", worst <= tol, beta=beta, lambda_inv=lambda_inv, worst_relative_error=worst)


def _check_homogeneous_degree(
    report: SuiteReport,
    samples: list[AllocationVector],
    beta: float,
    lambda_inv: float,
    tol: float,
) -> None:
    worst = 0.0
    for x in samples:
        base = fairness_homogeneous(x, beta, lambda_inv)
        if math.isinf(base):
            continue
        for t in (1e-3, 1e3):
            scaled = fairness_homogeneous(x.scaled(t), beta, lambda_inv)
            worst = max(worst, _relative_gap(scaled, t**lambda_inv * base))
    report.add("homogeneous_degree", worst <= tol, beta=beta, lambda_inv=lambda_inv, worst_relative_error=worst)
