"""Tests for grids and samplers."""

import numpy as np
import pytest

from src.errors import ParameterDomainError
from src.utils.grids import parse_grid, prepare_beta_grid
from src.utils.sampling import sample_allocation, sample_bounded_spread, sample_dominating


class TestParseGrid:
    """start:step:stop and comma lists."""

    def test_range_inclusive(self):
        """Both ends are included and near-singular values snap."""
        grid = parse_grid("-10:0.25:5")
        assert len(grid) == 61
        assert grid[0] == -10.0
        assert grid[-1] == 5.0
        assert 0.0 in grid
        assert 1.0 in grid

    def test_comma_list(self):
        """Order is kept."""
        assert parse_grid("3, 1,2") == [3.0, 1.0, 2.0]

    def test_descending_range(self):
        """Negative steps walk downwards."""
        assert parse_grid("1:-0.5:0") == [1.0, 0.5, 0.0]

    @pytest.mark.parametrize("text", ["", "1:0:2", "2:1:1", "a:1:2", "1:2", "x,y"])
    def test_rejects(self, text):
        """Malformed grids name the parameter."""
        with pytest.raises(ParameterDomainError) as excinfo:
            parse_grid(text, "beta_grid")
        assert excinfo.value.parameter == "beta_grid"


class TestPrepareBetaGrid:
    """Removal of beta = 1."""

    def test_removes_one(self):
        """beta = 1 is dropped, beta = 0 kept."""
        grid = prepare_beta_grid([0.0, 0.5, 1.0, 2.0])
        assert grid.betas == [0.0, 0.5, 2.0]
        assert grid.removed == [1.0]
        assert grid.has_entropy_slot

    def test_nothing_left(self):
        """A grid of only beta = 1 is refused."""
        with pytest.raises(ParameterDomainError):
            prepare_beta_grid([1.0])


class TestSamplers:
    """Seeded random vectors."""

    def test_allocation_keeps_a_positive_entry(self, rng):
        """Zeroing never empties the vector."""
        for _ in range(200):
            x = sample_allocation(rng, 4, zero_prob=0.9)
            assert x.sum() > 0
            assert np.all(x >= 0)

    def test_bounded_spread(self, rng):
        """max / min stays within the ratio."""
        x = sample_bounded_spread(rng, 50, 3.0)
        assert x.max() / x.min() <= 3.0

    def test_dominating(self, rng):
        """Every entry grows or stays, and the total grows."""
        x = np.array([1.0, 2.0, 3.0])
        y = sample_dominating(rng, x)
        assert np.all(y >= x)
        assert y.sum() > x.sum()
