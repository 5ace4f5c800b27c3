"""Seeded random allocation samplers."""

import numpy as np


def sample_allocation(
    rng: np.random.Generator,
    n: int,
    zero_prob: float = 0.0,
    concentration: float = 1.0,
) -> np.ndarray:
    """Draw a point of the simplex scaled by a random total.

    Shares come from a symmetric Dirichlet; the total spans six orders of
    magnitude. With zero_prob > 0 entries are zeroed independently, keeping
    at least one positive entry.

    Args:
        rng: Random generator.
        n: Number of users.
        zero_prob: Probability of zeroing each entry.
        concentration: Dirichlet concentration.

    Returns:
        Non-negative array of length n with a positive sum.
    """
    shares = rng.dirichlet(np.full(n, concentration))
    # Dirichlet can underflow to exact zeros for small concentrations
    shares = np.maximum(shares, 1e-12)
    total = 10.0 ** rng.uniform(-3, 3)
    values = shares * total
    if zero_prob > 0 and n > 1:
        mask = rng.random(n) < zero_prob
        if mask.all():
            mask[rng.integers(n)] = False
        values[mask] = 0.0
    return values


def sample_bounded_spread(rng: np.random.Generator, n: int, max_ratio: float) -> np.ndarray:
    """Strictly positive vector with max/min no larger than max_ratio."""
    scale = 10.0 ** rng.uniform(-2, 2)
    return scale * rng.uniform(1.0, max_ratio, size=n)


def sample_dominating(
    rng: np.random.Generator,
    x: np.ndarray,
    delta_range: tuple[float, float] = (0.01, 1.0),
) -> np.ndarray:
    """Return x + delta * gamma with gamma >= 0, gamma != 0 and sum(gamma) = sum(x).

    gamma is supported on a random non-empty subset of users.
    """
    n = len(x)
    support = rng.random(n) < 0.5
    if not support.any():
        support[rng.integers(n)] = True
    gamma = np.zeros(n)
    gamma[support] = rng.dirichlet(np.ones(int(support.sum())))
    gamma *= x.sum()
    delta = rng.uniform(*delta_range)
    return x + delta * gamma
