"""Tests for suite selection, check recording and report contents."""

from pathlib import Path

import numpy as np
import pytest

from mellinsio.config import RunConfig, load_config
from mellinsio.errors import ConfigurationError
from mellinsio.suites import (
    SUITE_REGISTRY,
    Measurement,
    SuiteContext,
    _combine,
    available_checks,
    run_suite,
)

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


class TestRegistry:
    """Test suite and check lookup."""

    def test_suites_registered(self):
        assert set(SUITE_REGISTRY) == {"identities", "pdo", "index"}
        assert "pv_cross_check" in available_checks("identities")
        assert "negative_controls" in available_checks("index")

    def test_unknown_suite(self, small_config):
        with pytest.raises(ConfigurationError, match="Unknown suite"):
            run_suite("everything", small_config)
        with pytest.raises(ConfigurationError):
            available_checks("everything")

    def test_unknown_check(self, small_grid):
        cfg = RunConfig(grid=small_grid, suites={"identities": ["conv_identity", "not_a_check"]})
        with pytest.raises(ConfigurationError, match="not_a_check"):
            run_suite("identities", cfg)

    def test_duplicate_checks_run_once(self, small_grid):
        cfg = RunConfig(grid=small_grid, suites={"identities": ["conv_identity", "conv_identity"]})
        report = run_suite("identities", cfg)
        assert [c.name for c in report.checks] == ["conv_identity"]


class TestIdentitiesSuite:
    """Test the identities suite on the reduced grid."""

    def test_all_pass(self, small_config):
        report = run_suite("identities", small_config)
        assert [c.name for c in report.checks] == small_config.suite_checks("identities")
        assert report.passed, report.failed
        assert report.verdict == "PASS"
        assert "mellin_gaussian" in report.plot_data

    def test_report_is_deterministic(self, small_config):
        first = run_suite("identities", small_config).to_dict()
        second = run_suite("identities", small_config).to_dict()
        assert first == second
        assert "wall_time" not in first["checks"][0]
        assert first["grid_hash"] == small_config.grid.grid_hash()

    def test_timing_frame(self, small_config):
        report = run_suite("identities", small_config)
        frame = report.timing_frame()
        assert list(frame.columns) == ["check", "status", "wall_time_s"]
        assert (frame["wall_time_s"] >= 0).all()


class TestPdoSuite:
    """Test exact PDO reductions through the suite runner."""

    def test_reductions(self, small_grid):
        cfg = RunConfig(grid=small_grid, suites={"pdo": ["pdo_reduces_to_conv", "pdo_diagonal"]})
        report = run_suite("pdo", cfg)
        assert report.passed, [c.detail for c in report.checks]


class TestIndexSuite:
    """Test the index checks and the negative control configuration."""

    def test_default_pair(self, index_config):
        report = run_suite("index", index_config)
        assert report.passed, [c.detail for c in report.checks]
        assert "loop_h" in report.plot_data

    def test_negative_control_fails(self):
        cfg = load_config(CONFIGS / "negative_control.yaml").with_overrides(grid_n=512)
        report = run_suite("index", cfg)
        records = {c.name: c for c in report.checks}
        assert not report.passed
        assert records["ellipticity"].status == "FAIL"
        assert records["ellipticity"].value == pytest.approx(1.2)
        assert "c at infinity" in records["ellipticity"].detail
        assert records["fiber_factorization"].status == "FAIL"
        assert records["negative_controls"].passed

    @pytest.mark.slow
    def test_regularizers_on_reduced_grid(self, small_grid):
        checks = [
            "identity_at_zero",
            "regularization_chain",
            "kernel_dims",
            "regularizer_W",
            "g_y_relation",
        ]
        cfg = RunConfig(grid=small_grid, homotopy_steps=3, suites={"index": checks})
        report = run_suite("index", cfg)
        records = {c.name: c for c in report.checks}
        assert report.passed, [(c.name, c.value, c.detail) for c in report.checks]
        assert records["regularizer_W"].value < 1e-6
        assert records["g_y_relation"].value < 1e-6
        assert list(report.plot_data["mu_scan"]["mu"]) == [0.0, 0.5, 1.0]
        assert {"sv_V", "sv_regularizer"} <= set(report.plot_data)

    @pytest.mark.slow
    def test_grid_stability_on_reduced_grid(self, small_grid):
        cfg = RunConfig(grid=small_grid, homotopy_steps=3, suites={"index": ["grid_stability"]})
        report = run_suite("index", cfg)
        (record,) = report.checks
        assert record.passed, record.detail
        assert record.value == 0.0
        assert "n_t 512 -> 1024" in record.detail
        frame = report.plot_data["grid_stability"]
        assert "scan_residual" in set(frame["name"])


class TestCombine:
    """Test folding of per-item measurements."""

    def test_empty(self):
        m = _combine([])
        assert m.passed and m.value is None

    def test_worst_failing_item_wins(self):
        m = _combine(
            [
                ("a", Measurement(1e-9, 1e-8, True)),
                ("b", Measurement(5e-8, 1e-8, False)),
                ("c", Measurement(2e-8, 1e-8, False)),
            ]
        )
        assert not m.passed
        assert m.value == 5e-8
        assert m.detail.startswith("failing: b, c")

    def test_worst_passing_item_reported(self):
        m = _combine([("a", Measurement(1e-9, 1e-8, True)), ("b", Measurement(3e-9, 1e-8, True))])
        assert m.passed and m.value == 3e-9


class TestContext:
    """Test per-check randomness."""

    def test_rng_depends_on_check_name_only(self, small_config):
        a, b = SuiteContext(small_config), SuiteContext(small_config)
        b.rng("other").random()
        np.testing.assert_array_equal(a.rng("disk").random(3), b.rng("disk").random(3))
        assert not np.array_equal(a.rng("disk").random(3), a.rng("other").random(3))
