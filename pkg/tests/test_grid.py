"""Tests for the log grid, the weight Phi and the Mellin transform."""

import numpy as np
import pytest
from pydantic import ValidationError

from mellinsio.errors import ConfigurationError, InvalidInputError
from mellinsio.grid import (
    GridFunction,
    GridSpec,
    from_log,
    from_weighted,
    lp_norm,
    mellin_forward,
    mellin_inverse,
    phi_weight,
    to_log,
    weighted_samples,
)


def gaussian(spec):
    return GridFunction.from_callable(spec, lambda t: np.exp(-np.log(t) ** 2))


class TestGridSpec:
    """Test grid validation and derived quantities."""

    def test_defaults(self):
        spec = GridSpec()
        assert spec.n_t == 2048
        assert spec.n_x == 1024
        assert spec.h == pytest.approx(32.0 / 2048)
        assert spec.u[0] == pytest.approx(-16.0)
        assert spec.u[-1] == pytest.approx(16.0 - spec.h)

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValidationError):
            GridSpec(n_t=100)

    def test_rejects_inverted_bounds(self):
        with pytest.raises(ValidationError):
            GridSpec(u_min=4.0, u_max=-4.0)

    def test_rejects_p_outside_range(self):
        with pytest.raises(ValidationError):
            GridSpec(p=1.0)

    def test_extra_keys_forbidden(self):
        with pytest.raises(ValidationError):
            GridSpec.model_validate({"n_t": 512, "dt": 0.1})

    def test_grid_hash_stable(self, small_grid):
        assert len(small_grid.grid_hash()) == 16
        assert small_grid.grid_hash() == GridSpec(n_t=512, n_x=256).grid_hash()
        assert small_grid.grid_hash() != GridSpec(n_t=512, n_x=128).grid_hash()

    def test_interior_mask_is_middle_half(self, small_grid):
        mask = small_grid.interior_mask()
        assert mask.sum() == pytest.approx(small_grid.n_t / 2, abs=2)
        assert not mask[0] and not mask[-1]

    def test_x_weights_sum_to_length(self, small_grid):
        assert small_grid.x_weights.sum() == pytest.approx(2 * small_grid.x_max)


class TestGridFunction:
    """Test grid function construction and arithmetic."""

    def test_wrong_length_rejected(self, small_grid):
        with pytest.raises(InvalidInputError):
            GridFunction(small_grid, np.ones(10))

    def test_non_finite_rejected(self, small_grid):
        samples = np.ones(small_grid.n_t)
        samples[3] = np.nan
        with pytest.raises(InvalidInputError):
            GridFunction(small_grid, samples)

    def test_arithmetic(self, small_grid):
        f = gaussian(small_grid)
        np.testing.assert_allclose((f + f).samples, f.scale(2.0).samples)
        np.testing.assert_allclose((f - f).samples, 0.0)

    def test_log_round_trip(self, small_grid):
        f = gaussian(small_grid)
        np.testing.assert_array_equal(from_log(to_log(f)).samples, f.samples)


class TestWeight:
    """Test Phi and the weighted coordinates operators act on."""

    def test_phi_round_trip(self, small_grid):
        f = gaussian(small_grid)
        back = phi_weight(phi_weight(f, "forward"), "inverse")
        np.testing.assert_allclose(back.samples, f.samples, rtol=1e-12)

    def test_unknown_direction(self, small_grid):
        with pytest.raises(InvalidInputError):
            phi_weight(gaussian(small_grid), "sideways")

    def test_weighted_round_trip(self, small_grid):
        values = np.exp(-small_grid.u**2) + 0j
        back = weighted_samples(from_weighted(small_grid, values))
        np.testing.assert_allclose(back, values, rtol=1e-12, atol=1e-300)

    def test_lp_norm_of_gaussian(self, small_grid):
        f = from_weighted(small_grid, np.exp(-small_grid.u**2))
        assert lp_norm(f) == pytest.approx((np.pi / 2.0) ** 0.25, rel=1e-10)


class TestMellin:
    """Test the Mellin transform pair."""

    def test_gaussian_closed_form(self, small_grid):
        spectrum = mellin_forward(gaussian(small_grid))
        exact = np.sqrt(np.pi) * np.exp(-small_grid.x**2 / 4.0)
        np.testing.assert_allclose(spectrum.values, exact, atol=1e-8)
        assert not spectrum.metadata["truncated"]

    def test_round_trip(self, small_grid):
        f = gaussian(small_grid)
        back = mellin_inverse(mellin_forward(f))
        err = np.max(np.abs(back.samples - f.samples)) / np.max(np.abs(f.samples))
        assert err <= 1e-6

    def test_truncation_flagged(self, small_grid):
        ones = GridFunction(small_grid, np.ones(small_grid.n_t))
        assert mellin_forward(ones).metadata["truncated"]

    def test_unvalidated_grid_rejected(self):
        spec = GridSpec.model_construct(
            u_min=-16.0, u_max=16.0, n_t=100, x_max=20.0, n_x=64, p=2.0
        )
        with pytest.raises(ConfigurationError):
            mellin_forward(GridFunction(spec, np.ones(100)))
