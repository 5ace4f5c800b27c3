"""Tests for the hierarchical construction and axiom verification."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.errors import ParameterDomainError, PartitionMismatchError
from src.measures.axioms import (
    GeneratorSpec,
    Partition,
    direct_product,
    fairness_log_generator,
    fairness_recursive,
    generator_mean,
    partition_weights,
    verify_axioms,
)
from src.measures.core import fairness, fairness_entropy_limit
from src.models.allocation import AllocationVector
from src.models.report import CheckStatus


class TestPartitionWeights:
    """Weights proportional to w_i^rho."""

    def test_uniform_weights(self):
        """Equal sums give equal weights."""
        assert partition_weights([1.0, 1.0], 0.5) == pytest.approx([0.5, 0.5])

    def test_proportional_weights(self):
        """rho = 1 weights by segment total."""
        assert partition_weights([1.0, 3.0], 1.0) == pytest.approx([0.25, 0.75])

    def test_rejects_non_positive_sums(self):
        """Zero or negative sums are refused."""
        with pytest.raises(ParameterDomainError):
            partition_weights([1.0, 0.0], 1.0)


class TestPartition:
    """Partition construction."""

    def test_split(self):
        """Cut indices produce contiguous segments."""
        partition = Partition.split([1, 2, 3, 4, 5], [2])
        assert partition.segments == ((1.0, 2.0), (3.0, 4.0, 5.0))
        assert partition.segment_sums == [3.0, 12.0]

    def test_needs_two_segments(self):
        """A single segment is not a partition."""
        with pytest.raises(ParameterDomainError):
            Partition(((1.0, 2.0),))

    def test_random_partition_keeps_entries(self, rng):
        """Random partitions permute the input."""
        partition = Partition.random([1.0, 2.0, 3.0, 4.0], rng)
        assert sorted(partition.concatenated.tolist()) == [1.0, 2.0, 3.0, 4.0]


class TestRecursion:
    """Partition irrelevance of the hierarchical construction."""

    @pytest.mark.parametrize("beta", [-2.0, -1.0, 0.5, 2.0, 3.0])
    def test_matches_direct_formula(self, beta):
        """f(x) equals the two-level composition."""
        x = [1.0, 2.0, 3.0, 4.0, 5.0]
        recursive = fairness_recursive(Partition.split(x, [2]), GeneratorSpec.power(beta), beta)
        assert recursive.value == pytest.approx(fairness(x, beta).value, rel=1e-9)

    def test_three_segments(self):
        """More than two segments compose the same way."""
        x = [0.5, 2.0, 3.0, 1.0, 7.0, 2.5]
        recursive = fairness_recursive(Partition.split(x, [1, 4]), GeneratorSpec.power(-1.5), -1.5)
        assert recursive.value == pytest.approx(fairness(x, -1.5).value, rel=1e-9)

    def test_logarithmic_generator_at_zero(self):
        """beta = 0 composes with the logarithm and rho = 1."""
        x = [1.0, 2.0, 3.0, 4.0]
        recursive = fairness_recursive(Partition.split(x, [3]), GeneratorSpec.logarithm(), 0.0)
        assert recursive.value == pytest.approx(fairness_entropy_limit(x).value, rel=1e-9)

    def test_rho_mismatch(self):
        """A wrong weight exponent is refused."""
        with pytest.raises(PartitionMismatchError, match="partition irrelevance not guaranteed"):
            fairness_recursive(Partition.split([1.0, 2.0, 3.0], [1]), GeneratorSpec.power(0.5, rho=1.0), 0.5)

    def test_generator_mismatch(self):
        """The power generator exponent must equal beta."""
        with pytest.raises(PartitionMismatchError):
            fairness_recursive(Partition.split([1.0, 2.0], [1]), GeneratorSpec.power(2.0), 0.5)

    def test_zero_sum_segment_dropped(self):
        """Empty-handed segments carry no weight below beta = 1."""
        partition = Partition(((0.0, 0.0), (1.0, 2.0)))
        value = fairness_recursive(partition, GeneratorSpec.power(0.5), 0.5).value
        assert value == pytest.approx(fairness([1.0, 2.0], 0.5).value, rel=1e-12)

    def test_zero_entry_above_one(self):
        """Any zero gives -inf above beta = 1."""
        partition = Partition(((0.0, 1.0), (1.0, 2.0)))
        assert fairness_recursive(partition, GeneratorSpec.power(2.0), 2.0).is_neg_inf

    @given(
        st.lists(st.floats(min_value=0.01, max_value=100.0), min_size=2, max_size=8),
        st.sampled_from([-4.0, -1.0, -0.5, 0.5, 2.0, 3.0]),
        st.integers(min_value=0, max_value=2**32 - 1),
    )
    @settings(max_examples=200, deadline=None)
    def test_random_partitions(self, values, beta, seed):
        """Random vector and partition pairs agree within 1e-9."""
        partition = Partition.random(values, np.random.default_rng(seed))
        recursive = fairness_recursive(partition, GeneratorSpec.power(beta), beta).value
        assert recursive == pytest.approx(fairness(partition.concatenated, beta).value, rel=1e-9)


class TestDirectProduct:
    """f(y (x) z) = sign * |f(y)| * |f(z)|."""

    @pytest.mark.parametrize("beta", [-1.0, 0.5, 2.0])
    def test_identity(self, beta):
        """Fairness multiplies over the direct product."""
        y, z = [1.0, 2.0], [3.0, 1.0, 1.0]
        product = fairness(direct_product(y, z), beta).value
        expected = math.copysign(abs(fairness(y, beta).value) * abs(fairness(z, beta).value), 1.0 - beta)
        assert product == pytest.approx(expected, rel=1e-10)

    def test_size(self):
        """Every pair of entries appears once."""
        assert direct_product([1.0, 2.0], [3.0, 4.0, 5.0]).n == 6


class TestGenerators:
    """Generator means and the logarithmic measure."""

    def test_power_mean(self):
        """beta = 1 weighted power mean is the arithmetic mean."""
        assert generator_mean([2.0, 4.0], [0.5, 0.5], GeneratorSpec.power(1.0, rho=0.0)) == pytest.approx(3.0)

    def test_log_mean(self):
        """Logarithmic generator gives the geometric mean."""
        assert generator_mean([2.0, 8.0], [0.5, 0.5], GeneratorSpec.logarithm()) == pytest.approx(4.0)

    def test_log_generator_is_entropy_measure(self):
        """r = 1 recovers exp(H)."""
        x = [1.0, 2.0, 5.0]
        assert fairness_log_generator(x) == pytest.approx(fairness_entropy_limit(x).value, rel=1e-12)
        assert fairness_log_generator(x, r=2.0) == pytest.approx(fairness_entropy_limit(x).value ** 2, rel=1e-12)


class TestVerifyAxioms:
    """Report produced by the axiom checks."""

    SAMPLES = [
        AllocationVector.of([1.0, 2.0, 3.0]),
        AllocationVector.of([0.5, 0.5, 4.0, 1.0]),
        AllocationVector.of([2.0, 0.0, 1.0]),
        AllocationVector.of([7.0]),
    ]

    def test_passes_on_regular_betas(self):
        """All axioms hold away from beta = 1."""
        report = verify_axioms(self.SAMPLES, [-1.0, 0.0, 0.5, 2.0], tol=1e-8, seed=1)
        assert report.passed, [check.to_dict() for check in report.failures]
        assert report.find("partition_irrelevance", beta=2.0)[0].status is CheckStatus.PASSED

    def test_flags_beta_one(self):
        """beta = 1 is flagged and the continuous axioms are skipped."""
        report = verify_axioms(self.SAMPLES, [1.0], seed=1)
        assert report.find("discontinuity", beta=1.0)[0].status is CheckStatus.FLAGGED
        assert report.find("continuity", beta=1.0)[0].status is CheckStatus.SKIPPED
        assert report.passed

    def test_splitting_skipped_at_zero(self):
        """The homogeneous checks need beta != 0."""
        report = verify_axioms(self.SAMPLES, [0.0], seed=1)
        assert not report.find("splitting")

    def test_rejects_bad_tolerance(self):
        """tol must be positive."""
        with pytest.raises(ParameterDomainError):
            verify_axioms(self.SAMPLES, [0.5], tol=0.0)
