"""Tests for dense convolution and PDO operators."""

import numpy as np
import pytest

from mellinsio.errors import InvalidInputError
from mellinsio.grid import GridFunction, GridSpec
from mellinsio.operators import (
    DenseOperator,
    cauchy_kernel,
    cauchy_sio_direct,
    chain_residual,
    compactness_proxy,
    conv_apply,
    conv_operator,
    eps_rank,
    identity,
    interior_probes,
    multiplication,
    op_norm_estimate,
    pdo_apply,
    pdo_operator,
    relative_defect,
    singular_values,
)
from mellinsio.symbols import (
    BivariateSymbol,
    combine_multipliers,
    constant_multiplier,
    from_multiplier,
    from_t_function,
    make_r_y,
    make_s_y,
)


class TestConvolution:
    """Test Mellin convolution operators Co(a)."""

    def test_constant_symbol_is_identity(self, small_grid):
        op = conv_operator(constant_multiplier(small_grid, 1.0))
        np.testing.assert_allclose(op.matrix, np.eye(small_grid.n_t), atol=1e-12)

    def test_homomorphism(self, small_grid):
        s, r = make_s_y(2.0, small_grid), make_r_y(2.0, small_grid)
        product = conv_operator(combine_multipliers(s, r, "mul"))
        composed = conv_operator(s) @ conv_operator(r)
        np.testing.assert_allclose(composed.matrix, product.matrix, atol=1e-10)

    @pytest.mark.parametrize("y", [1.5, 3.0])
    def test_s_squared_minus_r_squared_is_identity(self, y, small_grid):
        s = conv_operator(make_s_y(y, small_grid))
        r = conv_operator(make_r_y(y, small_grid))
        diff = (s @ s) - (r @ r)
        np.testing.assert_allclose(diff.matrix, np.eye(small_grid.n_t), atol=1e-10)

    def test_apply_to_grid_function(self, small_grid):
        op = conv_operator(constant_multiplier(small_grid, 2.0))
        f = GridFunction.from_callable(small_grid, lambda t: np.exp(-np.log(t) ** 2))
        np.testing.assert_allclose(op.apply(f).samples, 2.0 * f.samples, atol=1e-10)

    def test_symbol_on_other_grid(self, small_grid):
        other = GridSpec(n_t=256, n_x=128)
        with pytest.raises(InvalidInputError):
            conv_operator(make_s_y(2.0, other), small_grid)


class TestPDO:
    """Test Op(a) assembly."""

    def test_t_independent_symbol_gives_convolution(self, small_grid):
        s = make_s_y(2.0, small_grid)
        np.testing.assert_allclose(
            pdo_operator(from_multiplier(s)).matrix, conv_operator(s).matrix, atol=1e-10
        )

    def test_x_independent_symbol_gives_multiplication(self, small_grid):
        g = lambda t: 1.0 / (1.0 + t)  # noqa: E731
        op = pdo_operator(from_t_function(small_grid, g, "g"))
        np.testing.assert_allclose(op.matrix, multiplication(small_grid, g(small_grid.t)).matrix, atol=1e-10)

    def test_three_factor_product(self, small_grid):
        g = lambda t: np.exp(-np.log(t) ** 2 / 50.0)  # noqa: E731
        r = make_r_y(2.0, small_grid)
        a = pdo_operator(from_t_function(small_grid, g, "g"))
        c = conv_operator(r)
        direct = pdo_operator(
            BivariateSymbol(
                spec=small_grid,
                values=g(small_grid.t)[:, None] * r.values[None, :],
                boundary_minus=0.0,
                boundary_plus=0.0,
                func=lambda x: g(small_grid.t)[:, None] * r.evaluate(x)[None, :],
            )
        )
        np.testing.assert_allclose((a @ c).matrix, direct.matrix, atol=1e-10)


class TestMatrixFree:
    """Test application without assembled matrices."""

    def test_conv_apply_matches_matrix(self, small_grid, probes):
        r = make_r_y(2.0, small_grid)
        np.testing.assert_allclose(conv_apply(r, probes.T), conv_operator(r).matrix @ probes.T, atol=1e-12)
        np.testing.assert_allclose(conv_apply(r, probes[0]), conv_operator(r).matrix @ probes[0], atol=1e-12)

    @pytest.mark.parametrize("chunk", [64, 512])
    def test_pdo_apply_matches_matrix(self, chunk, small_grid, probes):
        g = lambda t: 1.0 / (1.0 + t)  # noqa: E731
        r = make_r_y(2.0, small_grid)
        symbol = BivariateSymbol(
            spec=small_grid,
            values=g(small_grid.t)[:, None] * r.values[None, :],
            boundary_minus=0.0,
            boundary_plus=0.0,
            func=lambda x: g(small_grid.t)[:, None] * r.evaluate(x)[None, :],
        )
        dense = pdo_operator(symbol).matrix @ probes.T
        np.testing.assert_allclose(pdo_apply(symbol, probes.T, chunk=chunk), dense, atol=1e-10)

    def test_chain_residual(self, small_grid, probes):
        s = conv_operator(make_s_y(2.0, small_grid))
        r = conv_operator(make_r_y(2.0, small_grid))
        # S^2 = I + R^2
        assert chain_residual([s, s], probes) == pytest.approx(relative_defect(s @ s, identity(small_grid), probes))
        assert chain_residual([identity(small_grid), identity(small_grid)], probes) == 0.0
        assert chain_residual([r, r], probes) > 0.0


class TestOperatorAlgebra:
    """Test composition helpers and grid checks."""

    def test_grid_mismatch(self, small_grid):
        other = GridSpec(n_t=256, n_x=128)
        with pytest.raises(InvalidInputError):
            identity(small_grid) @ identity(other)

    def test_shape_validation(self, small_grid):
        with pytest.raises(InvalidInputError):
            DenseOperator(np.eye(4), small_grid)

    def test_subtraction(self, small_grid):
        two = identity(small_grid).scaled(2.0)
        np.testing.assert_allclose((two - identity(small_grid)).matrix, np.eye(small_grid.n_t))

    def test_flags_propagate(self, small_grid):
        flags = np.zeros(small_grid.n_t, dtype=bool)
        flags[:3] = True
        flagged = DenseOperator(np.eye(small_grid.n_t), small_grid, "F", flags)
        assert (flagged @ identity(small_grid)).flags.sum() == 3


class TestAnalytics:
    """Test norm estimates, defects and compactness proxies."""

    def test_norm_of_diagonal(self, small_grid):
        values = np.ones(small_grid.n_t)
        values[7] = 3.0
        assert op_norm_estimate(multiplication(small_grid, values)) == pytest.approx(3.0, rel=1e-6)

    def test_norm_of_zero(self, small_grid):
        assert op_norm_estimate(np.zeros((4, 4))) == 0.0

    def test_norm_matches_largest_singular_value(self, small_grid):
        op = conv_operator(make_s_y(2.0, small_grid)) @ conv_operator(make_r_y(1.5, small_grid))
        assert op_norm_estimate(op) == pytest.approx(singular_values(op)[0], rel=1e-8)

    def test_eps_rank(self):
        assert eps_rank(np.diag([1.0, 1e-2, 1e-6]), 1e-3) == 2

    def test_probes_live_in_interior(self, small_grid, probes):
        outside = ~small_grid.interior_mask()
        assert probes.shape == (4, small_grid.n_t)
        assert np.max(np.abs(probes[:, outside])) < 1e-3

    def test_probes_deterministic(self, small_grid):
        np.testing.assert_array_equal(interior_probes(small_grid, seed=3), interior_probes(small_grid, seed=3))

    def test_relative_defect_zero_for_equal(self, small_grid, probes):
        op = conv_operator(make_s_y(2.0, small_grid))
        assert relative_defect(op, op, probes) == 0.0

    def test_identity_not_compact(self, small_grid):
        report = compactness_proxy(identity(small_grid))
        assert report.verdict == "NOT-COMPACT"
        assert report.decisive_ratio == pytest.approx(1.0)

    def test_rank_one_is_compact_like(self, small_grid):
        u = small_grid.u
        v = np.exp(-(u**2))
        report = compactness_proxy(DenseOperator(np.outer(v, v), small_grid, "rank1"))
        assert report.compact_like
        assert report.max_edge_response < 1e-2

    def test_rounding_noise_counts_as_zero(self, small_grid):
        rng = np.random.default_rng(0)
        n = small_grid.n_t
        noise = 1e-15 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        report = compactness_proxy(DenseOperator(noise, small_grid, "noise"))
        assert report.compact_like
        assert report.decisive_ratio == 0.0

    def test_noise_floor_scales_with_reference(self, small_grid):
        small = DenseOperator(1e-9 * np.eye(small_grid.n_t), small_grid, "small")
        assert compactness_proxy(small).verdict == "NOT-COMPACT"
        assert compactness_proxy(small, reference_norm=1e4).compact_like

    def test_reuses_given_singular_values(self, small_grid):
        op = identity(small_grid)
        sv = np.linspace(1.0, 0.0, small_grid.n_t)
        report = compactness_proxy(op, singular=sv)
        assert report.singular_values is not None
        np.testing.assert_array_equal(report.singular_values, sv)


class TestPrincipalValue:
    """Test the direct Cauchy quadrature against the multiplier route."""

    def test_kernel_antisymmetric_at_y_equal_p(self):
        rng = np.random.default_rng(0)
        t = np.exp(rng.uniform(-4.0, 4.0, 100))
        tau = np.exp(rng.uniform(-4.0, 4.0, 100))
        k = cauchy_kernel(t, tau, 2.0, 2.0)
        np.testing.assert_allclose(k, -cauchy_kernel(tau, t, 2.0, 2.0), rtol=1e-12)

    @pytest.mark.slow
    def test_quadrature_matches_multiplier(self):
        grid = GridSpec(n_t=1024, n_x=256)
        probe = np.exp(-(grid.u**2))[None, :]
        direct = cauchy_sio_direct(grid, 2.0)
        multiplier = conv_operator(make_s_y(2.0, grid))
        assert relative_defect(direct, multiplier, probe) < 1e-3
