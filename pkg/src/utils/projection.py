"""Euclidean projection onto {x >= floor, A x <= b} and feasible line steps."""

import numpy as np


def constraint_residual(x: np.ndarray, a: np.ndarray, b: np.ndarray, floor: float = 0.0) -> float:
    """Largest violation of A x <= b or x >= floor; 0 when feasible."""
    rows = float(np.max(a @ x - b))
    lower = float(np.max(floor - x))
    return max(0.0, rows, lower)


def project_polytope(
    point: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    floor: float = 0.0,
    max_sweeps: int = 5_000,
    tol: float = 1e-13,
) -> np.ndarray:
    """Project a point with Dykstra's alternating projections.

    Each constraint set is a half-space or the box x >= floor; Dykstra's
    correction terms make the iterates converge to the exact projection
    onto the intersection rather than to an arbitrary feasible point.
    The result can still violate a constraint by a small residual when the
    sweep cap is hit; callers needing exact feasibility use feasible_step.

    Args:
        point: Point to project.
        a: Constraint matrix (m x n).
        b: Right-hand sides (m).
        floor: Lower bound applied to every coordinate.
        max_sweeps: Cap on full passes over the constraints.
        tol: Stop when a sweep moves the iterate less than tol * scale and
            the constraint residual is below tol * scale.

    Returns:
        Projected point.
    """
    x = np.asarray(point, dtype=float).copy()
    m = a.shape[0]
    norms = np.einsum("ij,ij->i", a, a)
    corrections = np.zeros((m + 1, x.size))
    scale = max(1.0, float(np.abs(x).max()), float(np.abs(b).max()))

    # Already feasible points are their own projection
    if np.all(x >= floor) and np.all(a @ x <= b):
        return x

    for _ in range(max_sweeps):
        previous = x.copy()
        for k in range(m):
            y = x + corrections[k]
            excess = a[k] @ y - b[k]
            projected = y - (excess / norms[k]) * a[k] if excess > 0 else y
            corrections[k] = y - projected
            x = projected

        y = x + corrections[m]
        projected = np.maximum(y, floor)
        corrections[m] = y - projected
        x = projected

        if np.abs(x - previous).max() <= tol * scale and constraint_residual(x, a, b, floor) <= tol * scale:
            break
    return x


def feasible_step(
    origin: np.ndarray,
    target: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    floor: float = 0.0,
    slack_tol: float = 0.0,
) -> float:
    """Largest t in [0, 1] keeping origin + t (target - origin) feasible.

    Ratio test against every row of A x <= b and the floor, each relaxed by
    slack_tol. A row the origin already violates beyond slack_tol stops the
    step at t = 0.
    """
    origin = np.asarray(origin, dtype=float)
    direction = np.asarray(target, dtype=float) - origin
    t = 1.0

    rates = a @ direction
    slack = np.maximum(b + slack_tol - a @ origin, 0.0)
    rising = rates > 0
    if rising.any():
        t = min(t, float(np.min(slack[rising] / rates[rising])))

    falling = direction < 0
    if falling.any():
        t = min(t, float(np.min(np.maximum(origin[falling] - floor + slack_tol, 0.0) / -direction[falling])))
    return min(1.0, max(0.0, t))
