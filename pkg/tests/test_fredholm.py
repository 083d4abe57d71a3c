"""Tests for disk containment, winding numbers and the homotopy scan."""

import numpy as np
import pytest

from mellinsio.errors import DegenerateLoopError, DomainError, ScanError
from mellinsio.fredholm import (
    BoundaryLoop,
    build_loop,
    disk_check_f,
    disk_check_g,
    ellipticity_check,
    homotopy_scan,
    kernel_dims,
    winding_number,
    winding_report,
)
from mellinsio.constructions import symbol_h
from mellinsio.operators import DenseOperator, identity
from mellinsio.symbols import from_multiplier, from_t_function, make_r_y

X = np.linspace(-20.0, 20.0, 2001)
THETA = np.linspace(0.0, 2.0 * np.pi, 400, endpoint=False)


class TestDisks:
    """Test containment of f and g in their disks."""

    @pytest.mark.parametrize("v,w,psi,zeta", [(0.5, 0.3, 1.0, -0.7), (0.9j, -0.2, 0.3, 2.0), (0.0, 0.0, 1.0, 1.0)])
    def test_f_and_g_in_disks(self, v, w, psi, zeta):
        f = disk_check_f(v, w, psi, zeta, X)
        g = disk_check_g(v, w, psi, zeta, X)
        assert f.passed and g.passed
        assert f.radius == pytest.approx(max(abs(v), abs(w)))

    def test_g_needs_contraction(self):
        with pytest.raises(DomainError):
            disk_check_g(1.0, 0.3, 1.0, 1.0, X)


class TestWinding:
    """Test winding numbers of synthetic loops."""

    @pytest.mark.parametrize("k", [-2, -1, 0, 1, 3])
    def test_circles(self, k):
        loop = BoundaryLoop(np.exp(1j * k * THETA) if k else 2.0 + np.exp(1j * THETA))
        assert winding_number(loop) == k

    def test_loop_through_origin(self):
        loop = BoundaryLoop(np.exp(1j * THETA) - 1.0)
        with pytest.raises(DegenerateLoopError):
            winding_number(loop)

    def test_report_fields(self):
        report = winding_report(BoundaryLoop(3.0 * np.exp(1j * THETA)))
        assert report.winding == 1
        assert report.residue < 1e-10
        assert report.min_modulus == pytest.approx(3.0)

    def test_h_loops_have_zero_winding(self, binomials):
        h = symbol_h(*binomials)
        loop = build_loop(h)
        assert loop.closing_gap < 1e-6
        assert winding_number(loop) == 0


class TestEllipticity:
    """Test the boundary ellipticity check."""

    def test_r_symbol_is_not_elliptic(self, small_grid):
        report = ellipticity_check(from_multiplier(make_r_y(2.0, small_grid)))
        assert not report.passed
        assert report.min_boundary == 0.0

    def test_positive_function_is_elliptic(self, small_grid):
        report = ellipticity_check(from_t_function(small_grid, lambda t: 2.0 + 0.0 * t, "two"))
        assert report.passed
        assert report.min_modulus == pytest.approx(2.0)

    def test_degenerate_r_loop(self, small_grid):
        loop = build_loop(from_multiplier(make_r_y(2.0, small_grid)))
        with pytest.raises(DegenerateLoopError):
            winding_number(loop)


class TestKernelDims:
    """Test the kernel dimension indicator."""

    def test_identity(self, small_grid):
        assert kernel_dims(identity(small_grid), 1e-6) == (0, 0)

    def test_zero(self, small_grid):
        zero = DenseOperator(np.zeros((small_grid.n_t, small_grid.n_t)), small_grid)
        assert kernel_dims(zero, 1e-6) == (small_grid.n_t, small_grid.n_t)

    def test_small_singular_values(self, small_grid):
        diag = np.ones(small_grid.n_t)
        diag[:3] = 1e-9
        op = DenseOperator(np.diag(diag), small_grid)
        assert kernel_dims(op, 1e-6) == (3, 3)


class TestHomotopy:
    """Test the mu scan on constant coefficients."""

    @pytest.mark.slow
    def test_scan_keeps_index_zero(self, binomials):
        report = homotopy_scan(*binomials, steps=3, compactness=False)
        assert [row.mu for row in report.rows] == [0.0, 0.5, 1.0]
        assert report.index_zero
        assert report.verdict == "INDEX ZERO"
        assert all(row.lipschitz_ok for row in report.rows)
        assert all(row.elliptic for row in report.rows)
        assert report.notes

    @pytest.mark.slow
    def test_scan_with_compactness(self, binomials):
        report = homotopy_scan(*binomials, steps=3)
        assert report.chain_compact, [(r.mu, r.vl_ratio, r.lv_ratio, r.max_edge) for r in report.rows]
        # at mu = 0 both products equal H up to rounding
        assert report.rows[0].vl_ratio == 0.0 and report.rows[0].lv_ratio == 0.0
        assert all(row.residual < 1e-2 for row in report.rows)
        assert report.kernel_dims_end == (0, 0)

    def test_too_few_steps(self, binomials):
        with pytest.raises(ScanError):
            homotopy_scan(*binomials, steps=1)
