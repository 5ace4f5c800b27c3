"""Majorization order, Robin Hood transfers and Schur-concavity checks."""

import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

from src.errors import ParameterDomainError
from src.measures.core import AllocationLike, fairness
from src.models.allocation import AllocationVector, as_allocation
from src.models.report import SuiteReport
from src.utils.sampling import sample_allocation

# Relative slack on prefix sums, scaled by w(x)
PREFIX_TOL = 1e-9

SCHUR_BETAS = (-4.0, -2.5, -1.0, -0.5, 0.5, 2.0, 3.0)


class MajorizationResult(Enum):
    """Outcome of a majorization comparison."""

    TRUE = "true"
    FALSE = "false"
    INCOMPARABLE_SUMS = "incomparable_sums"


@dataclass(frozen=True)
class SortedAllocation:
    """Ascending order statistics of an allocation with prefix sums."""

    ascending: tuple[float, ...]
    prefix_sums: tuple[float, ...]

    @classmethod
    def of(cls, x: AllocationLike) -> "SortedAllocation":
        ascending = np.sort(as_allocation(x).array)
        return cls(tuple(ascending.tolist()), tuple(np.cumsum(ascending).tolist()))

    @property
    def total(self) -> float:
        return self.prefix_sums[-1]


def majorizes(y: AllocationLike, x: AllocationLike, tol: float | None = None) -> MajorizationResult:
    """Whether y majorizes x: equal totals and every ascending prefix of x bounded by y's.

    A majorizing vector is the more even one; the equal allocation majorizes
    every vector with the same total.

    Args:
        y: Candidate fairer vector.
        x: Candidate less fair vector.
        tol: Absolute tolerance; defaults to 1e-9 * w(x).

    Returns:
        TRUE, FALSE, or INCOMPARABLE_SUMS when totals differ beyond tol.
    """
    y = as_allocation(y)
    x = as_allocation(x)
    if x.n != y.n:
        raise ParameterDomainError("y", f"length {y.n} differs from length {x.n}")
    sorted_x = SortedAllocation.of(x)
    sorted_y = SortedAllocation.of(y)
    slack = PREFIX_TOL * max(x.total, y.total) if tol is None else tol
    if abs(x.total - y.total) > slack:
        return MajorizationResult.INCOMPARABLE_SUMS
    prefix_x = np.asarray(sorted_x.prefix_sums)
    prefix_y = np.asarray(sorted_y.prefix_sums)
    if np.all(prefix_x <= prefix_y + slack):
        return MajorizationResult.TRUE
    return MajorizationResult.FALSE


def robin_hood(x: AllocationLike, i: int, j: int, eps: float) -> AllocationVector:
    """Move eps from the richer user i to the poorer user j.

    The result majorizes the input.
    """
    x = as_allocation(x)
    if i == j:
        raise ParameterDomainError("j", "donor and recipient must differ")
    if not (0 <= i < x.n and 0 <= j < x.n):
        raise ParameterDomainError("i", f"indices must lie in [0, {x.n})")
    values = x.array
    if not values[i] > values[j]:
        raise ParameterDomainError("i", f"x[{i}] = {values[i]} is not larger than x[{j}] = {values[j]}")
    if not 0 < eps < values[i] - values[j]:
        raise ParameterDomainError("eps", f"must lie in (0, {values[i] - values[j]})")
    values[i] -= eps
    values[j] += eps
    return AllocationVector.of(values, x.label)


def random_robin_hood(x: AllocationLike, rng: np.random.Generator) -> AllocationVector | None:
    """Apply a random Robin Hood transfer; None for equal allocations."""
    x = as_allocation(x)
    values = x.array
    if x.is_equal:
        return None
    while True:
        i, j = rng.choice(x.n, size=2, replace=False)
        if values[i] != values[j]:
            break
    if values[i] < values[j]:
        i, j = j, i
    gap = values[i] - values[j]
    eps = float(rng.uniform(0.0, gap))
    if not 0 < eps < gap:
        eps = gap / 2
    return robin_hood(x, int(i), int(j), eps)


def order_preservation(
    vectors: Sequence[AllocationVector],
    values: dict[str, Sequence[float]],
) -> list[tuple[str, str, int]]:
    """Find majorization-ordered pairs whose fairness order is broken.

    Args:
        vectors: Labelled allocations.
        values: Fairness values per label along a common beta grid.

    Returns:
        (fairer label, less fair label, grid index) for every violation.
    """
    violations = []
    for y in vectors:
        for x in vectors:
            if x is y or x.n != y.n or majorizes(y, x) is not MajorizationResult.TRUE:
                continue
            for k, (fy, fx) in enumerate(zip(values[y.label], values[x.label])):
                if fy < fx - 1e-12 * max(1.0, abs(fx)):
                    violations.append((y.label, x.label, k))
    return violations


def _not_below(after: float, before: float, slack: float = 1e-12) -> bool:
    if before == -math.inf:
        return True
    return after >= before - slack * max(1.0, abs(before))


def schur_concavity_suite(
    beta_grid: Sequence[float] = SCHUR_BETAS,
    trials: int = 10_000,
    seed: int = 7,
) -> SuiteReport:
    """Random property checks of Schur-concavity and its corollaries.

    Every trial uses its own generator seeded with (seed, trial) so trials can
    be split across workers without changing results.
    """
    if trials <= 0:
        raise ParameterDomainError("trials", "must be positive")
    report = SuiteReport("schur")
    betas = list(beta_grid)

    decreases = {beta: 0 for beta in betas}
    counted = {beta: 0 for beta in betas}
    tax_failures = {beta: 0 for beta in betas}
    zero_failures = {beta: 0 for beta in betas}
    equal_failures = {beta: 0 for beta in betas}
    transitivity_failures = 0

    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        beta = betas[trial % len(betas)]
        n = int(rng.integers(2, 9))
        x = AllocationVector.of(sample_allocation(rng, n, zero_prob=0.15))

        moved = random_robin_hood(x, rng)
        if moved is not None:
            counted[beta] += 1
            if not _not_below(fairness(moved, beta).value, fairness(x, beta).value):
                decreases[beta] += 1

            further = random_robin_hood(moved, rng)
            if further is not None and majorizes(further, x) is not MajorizationResult.TRUE:
                transitivity_failures += 1

        positive = AllocationVector.of(sample_allocation(rng, n))
        tax = float(rng.uniform(0.0, 0.999)) * min(positive.values)
        taxed = AllocationVector.of(positive.array - tax)
        if not _not_below(fairness(positive, beta).value, fairness(taxed, beta).value):
            tax_failures[beta] += 1

        if beta < 1:
            padded = np.concatenate([positive.array, np.zeros(int(rng.integers(1, 4)))])
            base = fairness(positive, beta).value
            if abs(fairness(padded, beta).value - base) > 1e-12 * abs(base):
                zero_failures[beta] += 1

        equal = np.full(n, positive.total / n)
        f_equal = fairness(equal, beta).value
        f_x = fairness(positive, beta).value
        spread = max(positive.values) / min(positive.values)
        if f_x > f_equal + 1e-12 * abs(f_equal) or (spread > 1.001 and not f_x < f_equal):
            equal_failures[beta] += 1

    for beta in betas:
        report.add(
            "robin_hood_monotonicity",
            decreases[beta] == 0,
            beta=beta,
            operations=counted[beta],
            decreases=decreases[beta],
        )
        report.add("fixed_tax", tax_failures[beta] == 0, beta=beta, failures=tax_failures[beta])
        if beta < 1:
            report.add("zero_padding", zero_failures[beta] == 0, beta=beta, failures=zero_failures[beta])
        report.add("equal_allocation_maximal", equal_failures[beta] == 0, beta=beta, failures=equal_failures[beta])
    report.add("majorization_transitivity", transitivity_failures == 0, failures=transitivity_failures)
    return report
