"""Tests for the tradeoff solver over linear feasible regions."""

import numpy as np
import pytest
from pydantic import ValidationError

from src.errors import InfeasibleRegionError, ParameterDomainError
from src.models.tradeoff import FeasibleRegion, ParetoFlag, SolverOptions
from src.services.solver import SAMPLE_REGION, TradeoffSolver, grid_oracle, pareto_flag, solver_suite
from src.utils.projection import constraint_residual, feasible_step, project_polytope

# x1 + 2 x2 <= 2: throughput peaks at the vertex (2, 0)
SKEWED_REGION = FeasibleRegion(A=[[1.0, 2.0]], b=[2.0], names=["user1", "user2"])


@pytest.fixture
def solver() -> TradeoffSolver:
    """Small solver without the grid oracle."""
    return TradeoffSolver(SolverOptions(starts=4, grid_check=False))


class TestFeasibleRegion:
    """Region validation and membership."""

    def test_aliases(self):
        """A and b populate the matrix fields."""
        region = FeasibleRegion(A=[[1.0, 2.0]], b=[3.0])
        assert region.n == 2
        assert region.contains(np.array([1.0, 1.0]))
        assert not region.contains(np.array([2.0, 1.0]))
        assert not region.contains(np.array([-1.0, 0.0]))

    def test_shape_mismatch(self):
        """b must have one entry per row of A."""
        with pytest.raises(ValidationError):
            FeasibleRegion(A=[[1.0, 0.0]], b=[1.0, 2.0])
        with pytest.raises(ValidationError):
            FeasibleRegion(A=[[1.0, 0.0], [1.0]], b=[1.0, 2.0])

    def test_names_length(self):
        """One name per user."""
        with pytest.raises(ValidationError):
            FeasibleRegion(A=[[1.0, 0.0]], b=[1.0], names=["only"])


class TestParetoFlag:
    """Flag from the threshold |beta / (1 - beta)|."""

    def test_threshold(self):
        """beta = 3 preserves up to 1.5."""
        assert pareto_flag(3.0, 1.5) is ParetoFlag.PRESERVED
        assert pareto_flag(3.0, 2.0) is ParetoFlag.AT_RISK
        assert pareto_flag(0.5, 0.0) is ParetoFlag.PRESERVED


class TestBoundingBox:
    """Linear-program probes of the region."""

    def test_sample_region(self, solver):
        """x1 <= 1 and x2 <= 4."""
        assert solver.bounding_box(SAMPLE_REGION) == pytest.approx([1.0, 4.0])

    def test_empty_region(self, solver):
        """No nonnegative point satisfies x1 + x2 <= -1."""
        with pytest.raises(InfeasibleRegionError):
            solver.bounding_box(FeasibleRegion(A=[[1.0, 1.0]], b=[-1.0]))

    def test_unbounded_region(self, solver):
        """x1 - x2 <= 1 is unbounded."""
        with pytest.raises(InfeasibleRegionError, match="unbounded"):
            solver.bounding_box(FeasibleRegion(A=[[1.0, -1.0]], b=[1.0]))


class TestMaximizePhi:
    """Maximizers along the curve."""

    def test_throughput_only(self, solver):
        """lambda = 0 maximizes the total."""
        point = solver.maximize_phi(SAMPLE_REGION, 3.0, 0.0)
        assert point.throughput == pytest.approx(4.5, rel=1e-6)
        assert point.pareto_flag is ParetoFlag.PRESERVED

    def test_at_risk_point_is_dominated(self, solver):
        """lambda = 10 gives an allocation another feasible one dominates."""
        point = solver.maximize_phi(SAMPLE_REGION, 3.0, 10.0)
        assert point.pareto_flag is ParetoFlag.AT_RISK
        dominating = solver.dominance_search(SAMPLE_REGION, point.allocation)
        assert dominating is not None
        assert all(b >= a - 1e-9 for a, b in zip(point.allocation.values, dominating.values))
        assert dominating.total > point.allocation.total

    def test_preserved_point_is_pareto_optimal(self, solver):
        """lambda = 1 lands on the Pareto frontier."""
        point = solver.maximize_phi(SAMPLE_REGION, 3.0, 1.0)
        assert point.pareto_flag is ParetoFlag.PRESERVED
        assert solver.dominance_search(SAMPLE_REGION, point.allocation) is None
        assert SAMPLE_REGION.contains(point.allocation.array, tol=1e-8)

    def test_rejects_negative_lambda(self, solver):
        """lambda must be non-negative."""
        with pytest.raises(ParameterDomainError):
            solver.maximize_phi(SAMPLE_REGION, 3.0, -1.0)

    def test_curve_flags(self, solver):
        """Points past the threshold are at risk."""
        points = solver.tradeoff_curve(SAMPLE_REGION, 3.0, [0.5, 1.5, 3.0])
        assert [point.pareto_flag for point in points] == [
            ParetoFlag.PRESERVED,
            ParetoFlag.PRESERVED,
            ParetoFlag.AT_RISK,
        ]
        assert points[0].fairness <= points[1].fairness + 1e-9


class TestDominanceSearch:
    """Linear program for a dominating allocation."""

    def test_outside_region(self, solver):
        """Infeasible points are refused."""
        with pytest.raises(InfeasibleRegionError):
            solver.dominance_search(SAMPLE_REGION, [2.0, 2.0])

    def test_wrong_length(self, solver):
        """Dimension must match the region."""
        with pytest.raises(ParameterDomainError):
            solver.dominance_search(SAMPLE_REGION, [1.0, 1.0, 1.0])

    def test_interior_point(self, solver):
        """An interior point is dominated."""
        assert solver.dominance_search(SAMPLE_REGION, [0.5, 0.5]) is not None


class TestGridOracle:
    """Dense grid search for small regions."""

    def test_throughput_optimum(self):
        """lambda = 0 finds a point on x1 + x2 = 4.5."""
        point, phi = grid_oracle(SAMPLE_REGION, 3.0, 0.0, np.array([1.0, 4.0]), pitch=0.01)
        assert point.sum() == pytest.approx(4.5, abs=1e-9)
        assert phi == pytest.approx(np.log(4.5), abs=1e-9)

    def test_rejects_large_regions(self):
        """More than three users is refused."""
        region = FeasibleRegion(A=[[1.0, 1.0, 1.0, 1.0]], b=[1.0])
        with pytest.raises(ParameterDomainError):
            grid_oracle(region, 3.0, 1.0, np.ones(4))


class TestProjection:
    """Dykstra projection onto the region."""

    def test_lands_inside(self):
        """Projected points satisfy every constraint."""
        projected = project_polytope(np.array([3.0, 5.0]), SAMPLE_REGION.a, SAMPLE_REGION.b)
        assert SAMPLE_REGION.contains(projected, tol=1e-9)

    def test_feasible_point_unchanged(self):
        """Interior points project to themselves."""
        point = np.array([0.5, 1.0])
        assert project_polytope(point, SAMPLE_REGION.a, SAMPLE_REGION.b).tolist() == [0.5, 1.0]

    def test_floor(self):
        """Coordinates stay above the floor."""
        projected = project_polytope(np.array([-1.0, 2.0]), SAMPLE_REGION.a, SAMPLE_REGION.b, floor=1e-6)
        assert projected[0] >= 1e-6


class TestSolverSuite:
    """End-to-end checks on the sample region."""

    def test_suite_passes(self):
        """Grid agreement, optimality of preserved points and dominance of at-risk points."""
        report = solver_suite(lambda_grid=[0.0, 1.0, 1.5, 3.0], options=SolverOptions(starts=4))
        assert report.passed, [check.to_dict() for check in report.failures]
        assert len(report.find("grid_oracle_agreement")) == 4


class TestSkewedRegion:
    """Single skewed constraint x1 + 2 x2 <= 2."""

    def test_throughput_only_stays_feasible(self):
        """lambda = 0 ends on the vertex without leaving the region."""
        solver = TradeoffSolver(SolverOptions(starts=8, grid_check=False))
        point = solver.maximize_phi(SKEWED_REGION, 2.0, 0.0)
        assert SKEWED_REGION.contains(point.allocation.array, tol=1e-10)
        assert point.phi <= np.log(2.0) + 1e-12
        assert point.throughput == pytest.approx(2.0, rel=1e-6)
        assert solver.dominance_search(SKEWED_REGION, point.allocation) is None

    def test_curve_points_are_feasible(self):
        """Every maximizer along the curve lies in the region."""
        solver = TradeoffSolver(SolverOptions(starts=8, grid_check=False))
        for point in solver.tradeoff_curve(SKEWED_REGION, 2.0, [0.0, 0.5, 1.0, 2.0, 5.0]):
            assert SKEWED_REGION.contains(point.allocation.array, tol=1e-10), point.lam
            assert constraint_residual(point.allocation.array, SKEWED_REGION.a, SKEWED_REGION.b) <= 1e-10

    def test_preserved_frontier_is_monotone(self):
        """Fairness rises and throughput falls as lambda grows to the threshold."""
        solver = TradeoffSolver(SolverOptions(starts=8, grid_check=False))
        points = solver.tradeoff_curve(SKEWED_REGION, 2.0, [0.0, 0.5, 1.0, 2.0])
        assert all(point.pareto_flag is ParetoFlag.PRESERVED for point in points)
        for earlier, later in zip(points, points[1:]):
            assert later.fairness >= earlier.fairness - 1e-6 * abs(earlier.fairness)
            assert later.throughput <= earlier.throughput + 1e-6
        assert points[-1].fairness > points[0].fairness
        assert points[-1].throughput < points[0].throughput

    @pytest.mark.parametrize("lam", [0.0, 1.0, 2.0])
    def test_agrees_with_grid_oracle(self, lam):
        """Ascent and dense grid agree, and the ascent never beats the true optimum by more than grid error."""
        point = TradeoffSolver(SolverOptions(starts=8)).maximize_phi(SKEWED_REGION, 2.0, lam)
        assert point.oracle_phi is not None
        assert abs(point.phi - point.oracle_phi) <= 1e-3
        assert SKEWED_REGION.contains(point.allocation.array, tol=1e-10)


class TestFeasibleStep:
    """Ratio test along a segment."""

    def test_stops_at_the_boundary(self):
        """From (0.5, 0.5) towards (3, 0.5) the step ends at x1 = 1."""
        t = feasible_step(np.array([0.5, 0.5]), np.array([3.0, 0.5]), SAMPLE_REGION.a, SAMPLE_REGION.b)
        assert t == pytest.approx(0.2)

    def test_full_step_when_inside(self):
        """A feasible target is reached."""
        assert feasible_step(np.array([0.5, 0.5]), np.array([0.8, 2.0]), SAMPLE_REGION.a, SAMPLE_REGION.b) == 1.0

    def test_floor(self):
        """Coordinates may not drop below the floor."""
        t = feasible_step(np.array([0.5, 0.5]), np.array([-0.5, 0.5]), SAMPLE_REGION.a, SAMPLE_REGION.b, floor=0.1)
        assert t == pytest.approx(0.4)

    def test_residual(self):
        """Largest violation, zero when feasible."""
        assert constraint_residual(np.array([0.5, 0.5]), SAMPLE_REGION.a, SAMPLE_REGION.b) == 0.0
        assert constraint_residual(np.array([1.5, 3.5]), SAMPLE_REGION.a, SAMPLE_REGION.b) == pytest.approx(0.5)


class TestGridPitch:
    """Coarsening of the oracle grid."""

    BOX = FeasibleRegion(A=[[1.0, 0.0], [0.0, 1.0]], b=[1.0, 1.0])

    def test_no_warning_when_pitch_kept(self, warnings_logged):
        """A cap that needs no coarser pitch stays silent."""
        grid_oracle(self.BOX, 2.0, 1.0, np.array([1.0, 1.0]), pitch=0.1, max_points=120)
        assert not any("too fine" in message for message in warnings_logged)

    def test_warns_when_coarsened(self, warnings_logged):
        """A tight cap coarsens the pitch and says so."""
        grid_oracle(self.BOX, 2.0, 1.0, np.array([1.0, 1.0]), pitch=0.1, max_points=25)
        assert any("too fine" in message for message in warnings_logged)
