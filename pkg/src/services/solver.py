"""Tradeoff solver - maximizes Phi_lambda over linear feasible regions."""

import math
from collections.abc import Sequence

import numpy as np
from loguru import logger
from scipy.optimize import linprog

from src.config import get_settings
from src.errors import (
    InfeasibleRegionError,
    ParameterDomainError,
    SolverConvergenceError,
)
from src.measures.alpha import (
    pareto_lambda_max,
    tradeoff_gradient,
    tradeoff_objective,
)
from src.measures.core import fairness_unified, fairness_unified_batch
from src.models.allocation import AllocationVector, as_allocation
from src.models.report import SuiteReport
from src.models.tradeoff import (
    FeasibleRegion,
    ParetoFlag,
    SolverOptions,
    TradeoffPoint,
)
from src.utils.projection import constraint_residual, feasible_step, project_polytope

# Two users: x1 <= 1, x2 <= 4, x1 + x2 <= 4.5. Overweighting fairness pulls x2
# below 3.5, where (1, 3.5) dominates.
SAMPLE_REGION = FeasibleRegion(
    A=[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
    b=[1.0, 4.0, 4.5],
    names=["user1", "user2"],
)
SAMPLE_LAMBDAS = (0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0)

# Largest number of backtracking halvings per iteration
_MAX_HALVINGS = 60
# Constraint slack allowed on iterates, relative to max |b|
_FEASIBILITY_SLACK = 1e-12


def pareto_flag(beta: float, lam: float) -> ParetoFlag:
    """PRESERVED iff lam <= |beta / (1 - beta)|."""
    if lam <= pareto_lambda_max(beta) + 1e-12:
        return ParetoFlag.PRESERVED
    return ParetoFlag.AT_RISK


def _phi_rows(rows: np.ndarray, beta: float, lam: float) -> np.ndarray:
    """Phi_lambda over the rows of an array; -inf where undefined."""
    totals = rows.sum(axis=1)
    phi = np.full(len(rows), -np.inf)
    usable = totals > 0
    if not usable.any():
        return phi
    efficiency = np.log(totals[usable])
    if lam == 0:
        phi[usable] = efficiency
        return phi
    values = fairness_unified_batch(rows[usable], beta)
    finite = np.isfinite(values)
    sign = 1.0 if beta < 1 else -1.0
    scores = np.full(len(values), -np.inf)
    scores[finite] = lam * sign * np.log(np.abs(values[finite])) + efficiency[finite]
    phi[usable] = scores
    return phi


def grid_oracle(
    region: FeasibleRegion,
    beta: float,
    lam: float,
    upper: np.ndarray,
    pitch: float = 1e-3,
    max_points: int = 4_000_000,
) -> tuple[np.ndarray, float]:
    """Best grid point of the region for n <= 3.

    Args:
        region: Feasible region.
        beta: Exponent.
        lam: Tradeoff weight.
        upper: Per-coordinate upper bounds of the region.
        pitch: Grid spacing; coarsened when the grid exceeds max_points.
        max_points: Cap on evaluated grid points.

    Returns:
        (best point, its Phi).
    """
    n = region.n
    if n > 3:
        raise ParameterDomainError("region", "grid oracle supports at most 3 users")
    counts = np.floor(upper / pitch + 1e-9).astype(int) + 1
    if float(np.prod(counts.astype(float))) > max_points:
        coarse = float((np.prod(upper) / max_points) ** (1.0 / n))
        if coarse > pitch:
            logger.warning(f"[SOLVER] grid pitch {pitch:g} too fine for n = {n}, using {coarse:.3g}")
            pitch = coarse
            counts = np.floor(upper / pitch + 1e-9).astype(int) + 1

    axes = [np.arange(count) * pitch for count in counts]
    a, b = region.a, region.b
    slack = 1e-12 * max(1.0, float(np.abs(b).max()))
    best_point, best_phi = np.zeros(n), -math.inf

    # Chunk along the first axis
    rest = np.stack(np.meshgrid(*axes[1:], indexing="ij"), axis=-1).reshape(-1, n - 1) if n > 1 else np.zeros((1, 0))
    chunk = max(1, max_points // (4 * len(rest)))
    for start in range(0, len(axes[0]), chunk):
        first = axes[0][start : start + chunk]
        rows = np.column_stack([np.repeat(first, len(rest)), np.tile(rest, (len(first), 1))])
        rows = rows[np.all(rows @ a.T <= b + slack, axis=1)]
        if len(rows) == 0:
            continue
        phi = _phi_rows(rows, beta, lam)
        index = int(np.argmax(phi))
        if phi[index] > best_phi:
            best_point, best_phi = rows[index].copy(), float(phi[index])
    return best_point, best_phi


class TradeoffSolver:
    """Multi-start projected gradient ascent on Phi_lambda."""

    def __init__(self, options: SolverOptions | None = None) -> None:
        """Initialize the solver.

        Args:
            options: Solver options; defaults come from settings.
        """
        self._options = options or SolverOptions.from_settings(get_settings())

    @property
    def options(self) -> SolverOptions:
        return self._options

    def bounding_box(self, region: FeasibleRegion) -> np.ndarray:
        """Largest feasible value of each coordinate; rejects empty or unbounded regions."""
        upper = np.zeros(region.n)
        for j in range(region.n):
            objective = np.zeros(region.n)
            objective[j] = -1.0
            result = linprog(objective, A_ub=region.a, b_ub=region.b, bounds=[(0, None)] * region.n, method="highs")
            if result.status == 2:
                raise InfeasibleRegionError("feasible region is empty")
            if result.status == 3:
                raise InfeasibleRegionError(f"feasible region is unbounded along coordinate {j}")
            if result.status != 0:
                raise SolverConvergenceError(f"bounding-box probe failed: {result.message}")
            upper[j] = -result.fun
        if not np.all(upper > 0):
            raise InfeasibleRegionError("feasible region has no interior in the positive orthant")
        return upper

    def _vertices(self, region: FeasibleRegion, rng: np.random.Generator, count: int) -> list[np.ndarray]:
        """Vertices reached by maximizing linear objectives."""
        n = region.n
        directions = [np.eye(n)[j] for j in range(n)] + [np.ones(n)]
        directions += [rng.normal(size=n) for _ in range(max(0, 2 * count - len(directions)))]
        vertices: list[np.ndarray] = []
        for direction in directions:
            result = linprog(-direction, A_ub=region.a, b_ub=region.b, bounds=[(0, None)] * n, method="highs")
            if result.status != 0:
                continue
            if not any(np.allclose(result.x, v, atol=1e-10) for v in vertices):
                vertices.append(np.asarray(result.x, dtype=float))
            if len(vertices) >= count:
                break
        return vertices

    def _starts(self, region: FeasibleRegion, rng: np.random.Generator) -> list[np.ndarray]:
        """Region vertices followed by random interior points."""
        total = self._options.starts
        vertices = self._vertices(region, rng, max(1, total // 2))
        if not vertices:
            raise SolverConvergenceError("no vertex of the region could be found")
        stack = np.array(vertices)
        centroid = stack.mean(axis=0)
        starts = list(vertices)
        while len(starts) < total:
            weights = rng.dirichlet(np.ones(len(stack)))
            point = 0.5 * (weights @ stack) + 0.5 * centroid
            starts.append(point)
        return starts[:total]

    def _interior_point(self, region: FeasibleRegion, floor: float) -> np.ndarray:
        """Center of the largest ball inside {x >= floor, A x <= b}."""
        n = region.n
        a, b = region.a, region.b
        a_ub = np.vstack(
            [
                np.column_stack([a, np.linalg.norm(a, axis=1)]),
                np.column_stack([-np.eye(n), np.ones(n)]),
            ]
        )
        b_ub = np.concatenate([b, np.full(n, -floor)])
        objective = np.zeros(n + 1)
        objective[-1] = -1.0
        result = linprog(objective, A_ub=a_ub, b_ub=b_ub, bounds=[(0, None)] * (n + 1), method="highs")
        if result.status != 0:
            raise SolverConvergenceError(f"no interior point above the floor: {result.message}")
        logger.debug(f"[SOLVER] interior anchor radius {result.x[-1]:.3g}")
        return np.asarray(result.x[:n], dtype=float)

    @staticmethod
    def _pull_inside(
        point: np.ndarray,
        anchor: np.ndarray,
        region: FeasibleRegion,
        floor: float,
        slack: float,
    ) -> np.ndarray:
        """Point itself when feasible, else the last feasible point on the segment from anchor."""
        a, b = region.a, region.b
        if constraint_residual(point, a, b, floor) <= slack:
            return point
        t = feasible_step(anchor, point, a, b, floor, slack)
        return anchor + t * (point - anchor)

    def _ascend(
        self,
        start: np.ndarray,
        region: FeasibleRegion,
        beta: float,
        lam: float,
        floor: float,
        anchor: np.ndarray,
    ) -> tuple[np.ndarray, float]:
        """Projected gradient ascent with backtracking from step 1.0.

        Every iterate stays feasible: the projected trial point is cut back to
        the last feasible point on the segment from the current iterate.
        """
        a, b = region.a, region.b
        slack = _FEASIBILITY_SLACK * max(1.0, float(np.abs(b).max()))
        x = self._pull_inside(project_polytope(start, a, b, floor), anchor, region, floor, slack)
        phi = tradeoff_objective(x, beta, lam)
        for iteration in range(self._options.max_iterations):
            gradient = tradeoff_gradient(x, beta, lam)
            step = 1.0
            for _ in range(_MAX_HALVINGS):
                projected = project_polytope(x + step * gradient, a, b, floor)
                t = feasible_step(x, projected, a, b, floor, slack)
                candidate = x + t * (projected - x)
                candidate_phi = tradeoff_objective(candidate, beta, lam)
                if candidate_phi > phi:
                    break
                step /= 2
            else:
                logger.debug(f"[SOLVER] stalled after {iteration} iterations at Phi = {phi:.12g}")
                break
            gain = candidate_phi - phi
            x, phi = candidate, candidate_phi
            if gain <= self._options.tol * max(1.0, abs(phi)):
                logger.debug(f"[SOLVER] converged after {iteration + 1} iterations at Phi = {phi:.12g}")
                break
        return x, phi

    def maximize_phi(
        self,
        region: FeasibleRegion,
        beta: float,
        lam: float,
        options: SolverOptions | None = None,
    ) -> TradeoffPoint:
        """Best allocation for Phi_lambda across all starts.

        Args:
            region: Feasible region.
            beta: Exponent in (0, 1) or (1, inf).
            lam: Tradeoff weight, lam >= 0.
            options: Per-call override of the solver options.

        Returns:
            Tradeoff point with its Pareto flag.
        """
        if options is not None:
            return TradeoffSolver(options).maximize_phi(region, beta, lam)
        flag = pareto_flag(beta, lam)
        if not lam >= 0 or not math.isfinite(lam):
            raise ParameterDomainError("lambda", "must be finite and non-negative")

        upper = self.bounding_box(region)
        floor = 1e-9 * float(np.linalg.norm(upper))
        rng = np.random.default_rng(self._options.seed)
        anchor = self._interior_point(region, floor)

        best_x, best_phi = None, -math.inf
        for index, start in enumerate(self._starts(region, rng)):
            x, phi = self._ascend(start, region, beta, lam, floor, anchor)
            logger.debug(f"[SOLVER] start {index}: Phi = {phi:.12g}")
            if phi > best_phi:
                best_x, best_phi = x, phi
        if best_x is None:
            raise SolverConvergenceError("every start ended outside the domain of Phi")

        oracle_phi = None
        if self._options.grid_check and region.n <= 3:
            grid_x, oracle_phi = grid_oracle(
                region, beta, lam, upper, self._options.grid_pitch, self._options.max_grid_points
            )
            if oracle_phi > best_phi + 1e-9 * max(1.0, abs(best_phi)):
                logger.warning(
                    f"[SOLVER] grid oracle beat ascent ({oracle_phi:.9g} > {best_phi:.9g}), refining from grid point"
                )
                x, phi = self._ascend(np.maximum(grid_x, floor), region, beta, lam, floor, anchor)
                if phi > best_phi:
                    best_x, best_phi = x, phi

        scale = max(1.0, float(np.abs(region.b).max()))
        if not region.contains(best_x, tol=1e-9 * scale):
            residual = constraint_residual(best_x, region.a, region.b)
            raise SolverConvergenceError(f"maximizer violates the region by {residual:.3g}")

        allocation = AllocationVector.of(best_x)
        return TradeoffPoint(
            lam=lam,
            beta=beta,
            allocation=allocation,
            fairness=fairness_unified(allocation, beta).value,
            throughput=allocation.total,
            phi=best_phi,
            pareto_flag=flag,
            oracle_phi=oracle_phi,
        )

    def tradeoff_curve(
        self,
        region: FeasibleRegion,
        beta: float,
        lambda_grid: Sequence[float],
    ) -> list[TradeoffPoint]:
        """One maximizer per lambda, flagged by the Pareto threshold."""
        threshold = pareto_lambda_max(beta)
        logger.info(f"[SOLVER] tracing {len(lambda_grid)} points, beta = {beta}, Pareto threshold {threshold:g}")
        points = [self.maximize_phi(region, beta, float(lam)) for lam in lambda_grid]
        at_risk = sum(point.pareto_flag is ParetoFlag.AT_RISK for point in points)
        logger.info(f"[SOLVER] curve done: {len(points) - at_risk} preserved, {at_risk} at risk")
        return points

    def dominance_search(
        self,
        region: FeasibleRegion,
        x: AllocationVector | Sequence[float],
        tol: float = 1e-6,
    ) -> AllocationVector | None:
        """Feasible y >= x with sum(y - x) > tol, or None when x is Pareto optimal."""
        point = as_allocation(x).array
        if len(point) != region.n:
            raise ParameterDomainError("x", f"expected {region.n} users, got {len(point)}")
        scale = max(1.0, float(np.abs(region.b).max()))
        if not region.contains(point, tol=1e-9 * scale):
            raise InfeasibleRegionError("allocation lies outside the feasible region")

        result = linprog(
            -np.ones(region.n),
            A_ub=region.a,
            b_ub=region.b,
            bounds=[(value, None) for value in point],
            method="highs",
        )
        if result.status != 0:
            return None
        improved = np.maximum(np.asarray(result.x, dtype=float), point)
        if float(np.sum(improved - point)) > tol:
            return AllocationVector.of(improved)
        return None


def solver_suite(
    region: FeasibleRegion = SAMPLE_REGION,
    beta: float = 3.0,
    lambda_grid: Sequence[float] = SAMPLE_LAMBDAS,
    options: SolverOptions | None = None,
) -> SuiteReport:
    """Check grid agreement, Pareto optimality of preserved points and dominance of at-risk points."""
    report = SuiteReport("solver")
    solver = TradeoffSolver(options)
    points = solver.tradeoff_curve(region, beta, lambda_grid)

    for point in points:
        if point.oracle_phi is not None:
            report.add(
                "grid_oracle_agreement",
                abs(point.phi - point.oracle_phi) <= 1e-3,
                beta=beta,
                lam=point.lam,
                phi=point.phi,
                oracle_phi=point.oracle_phi,
            )
        if point.pareto_flag is ParetoFlag.PRESERVED:
            dominating = solver.dominance_search(region, point.allocation)
            report.add("preserved_is_pareto_optimal", dominating is None, beta=beta, lam=point.lam)

    dominated = [
        point.lam
        for point in points
        if point.pareto_flag is ParetoFlag.AT_RISK and solver.dominance_search(region, point.allocation) is not None
    ]
    has_at_risk = any(point.pareto_flag is ParetoFlag.AT_RISK for point in points)
    if has_at_risk:
        report.add("at_risk_dominated", bool(dominated), beta=beta, dominated_lambdas=dominated)

    preserved = [point for point in points if point.pareto_flag is ParetoFlag.PRESERVED]
    preserved.sort(key=lambda point: point.lam)
    monotone = all(
        later.fairness >= earlier.fairness - 1e-6 * abs(earlier.fairness)
        and later.throughput <= earlier.throughput + 1e-6 * earlier.throughput
        for earlier, later in zip(preserved, preserved[1:])
    )
    report.add("preserved_curve_monotone", monotone, beta=beta, points=len(preserved))
    return report
