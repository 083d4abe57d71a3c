"""Tests for verdicts on a grid and on its refinement."""

import numpy as np
import pytest

from mellinsio.config import Thresholds
from mellinsio.grid import GridSpec
from mellinsio.refinement import (
    GridVerdict,
    RefinementReport,
    algebra_verdicts,
    grid_stability,
    index_verdicts,
    refined_grid,
)

LIMITS = Thresholds()


class TestRefinedGrid:
    """Test the doubled grid."""

    def test_sizes_double_and_range_stays(self, small_grid):
        fine = refined_grid(small_grid)
        assert (fine.n_t, fine.n_x) == (1024, 512)
        assert (fine.u_min, fine.u_max, fine.x_max) == (small_grid.u_min, small_grid.u_max, small_grid.x_max)
        assert fine.h == pytest.approx(small_grid.h / 2.0)

    def test_verdict_threshold(self):
        assert GridVerdict("a", 1e-9, 1e-8).passed
        assert not GridVerdict("a", 1e-7, 1e-8).passed
        assert not GridVerdict("a", np.inf, 0.0).passed
        assert GridVerdict("index_zero", 0.0, 0.0).passed

    def test_mismatch_reported(self, small_grid):
        coarse = {"x": GridVerdict("x", 1.0, 2.0), "y": GridVerdict("y", 1.0, 2.0)}
        fine = {"x": GridVerdict("x", 1.5, 2.0), "y": GridVerdict("y", 3.0, 2.0)}
        report = RefinementReport(small_grid, refined_grid(small_grid), coarse, fine)
        assert report.mismatches == ["y"]
        assert not report.stable
        frame = report.to_frame()
        assert list(frame["name"]) == ["x", "y"]
        assert list(frame["passed_refined"]) == [True, False]


class TestVerdicts:
    """Test the matrix-free measurements on the reduced grid."""

    def test_algebra_exact(self, small_grid, probes):
        pointwise, operator = algebra_verdicts(small_grid, [1.5, 2.0, 3.0], LIMITS, probes)
        assert pointwise.passed and operator.passed
        assert operator.value < 1e-12

    def test_index_verdicts_at_constant_coefficients(self, binomials, probes):
        verdicts = {v.name: v for v in index_verdicts(*binomials, LIMITS, probes, steps=3)}
        assert verdicts["index_zero"].value == 0.0
        assert verdicts["identity_at_zero"].value < 1e-12
        assert verdicts["scan_residual"].passed

    def test_non_elliptic_scan_is_not_index_zero(self, binomials, probes):
        # boundary columns of h are 1, so a floor above 1 can never be met
        strict = Thresholds(ellipticity=10.0)
        verdicts = {v.name: v for v in index_verdicts(*binomials, strict, probes, steps=2)}
        assert verdicts["index_zero"].value == np.inf
        assert not verdicts["index_zero"].passed


class TestGridStability:
    """Test the comparison across the doubled grid."""

    @pytest.mark.slow
    def test_constant_coefficients_are_stable(self, binomials):
        dc, dd = binomials
        report = grid_stability(dc, dd, [dc], LIMITS, [1.5, 2.0, 3.0], steps=3)
        assert report.fine == GridSpec(n_t=1024, n_x=512)
        assert set(report.coarse) == {
            "algebra_pointwise",
            "algebra_operator",
            "shift_realization",
            "binomial_realization",
            "neumann_vs_series",
            "fiber_factorization",
            "index_zero",
            "identity_at_zero",
            "scan_residual",
        }
        assert report.stable, report.to_frame()
        assert all(v.passed for v in report.refined.values()), report.to_frame()
