"""Tests for YAML run configuration loading and validation."""

from pathlib import Path

import pytest

from mellinsio.config import RunConfig, load_config, parse_config
from mellinsio.errors import ConfigurationError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


class TestDefaults:
    """Test the built-in defaults."""

    def test_default_grid(self):
        cfg = RunConfig()
        assert cfg.grid.n_t == 2048 and cfg.grid.n_x == 1024
        assert cfg.y_values == [1.5, 2.0, 3.0]
        assert cfg.suite_checks("pdo") is None

    def test_default_file_matches_builtin(self):
        assert load_config(CONFIGS / "default.yaml") == RunConfig()

    def test_none_path(self):
        assert load_config(None) == RunConfig()

    def test_fixture_and_shift_lookup(self):
        cfg = RunConfig()
        assert cfg.fixture("half")(1.0) == pytest.approx(0.5)
        assert cfg.shift("double")(1.0) == pytest.approx(2.0)

    def test_unknown_fixture(self):
        with pytest.raises(ConfigurationError, match="Unknown fixture"):
            RunConfig().fixture("missing")


class TestParsing:
    """Test error reporting with line numbers."""

    def test_yaml_syntax_error_has_line(self):
        with pytest.raises(ConfigurationError) as exc:
            parse_config("seed: 0\ngrid:\n  n_t: [1\n")
        assert exc.value.line is not None
        assert str(exc.value).startswith("line ")

    def test_unknown_key_reports_its_line(self):
        with pytest.raises(ConfigurationError) as exc:
            parse_config("seed: 0\nbogus: 1\n")
        assert exc.value.line == 2

    def test_nested_validation_error(self):
        with pytest.raises(ConfigurationError) as exc:
            parse_config("seed: 1\ngrid:\n  n_t: 100\n")
        assert exc.value.line == 3
        assert "n_t" in str(exc.value)

    def test_dangling_reference(self):
        with pytest.raises(ConfigurationError, match="unknown fixture"):
            parse_config("shifts:\n  alpha: {omega: nowhere}\n")

    def test_top_level_must_be_mapping(self):
        with pytest.raises(ConfigurationError):
            parse_config("- 1\n- 2\n")

    def test_empty_document(self):
        assert parse_config("") == RunConfig()

    def test_suite_selection(self):
        cfg = parse_config("suites:\n  identities: [mellin_round_trip]\n")
        assert cfg.suite_checks("identities") == ["mellin_round_trip"]

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="not found"):
            load_config(tmp_path / "absent.yaml")


class TestOverrides:
    """Test the command line overrides."""

    def test_grid_n_halves_n_x(self):
        cfg = RunConfig().with_overrides(grid_n=512, seed=7)
        assert (cfg.grid.n_t, cfg.grid.n_x, cfg.seed) == (512, 256, 7)

    def test_no_overrides(self):
        assert RunConfig().with_overrides() == RunConfig()

    def test_invalid_grid_n(self):
        with pytest.raises(ConfigurationError):
            RunConfig().with_overrides(grid_n=100)


class TestShippedConfigs:
    """Test the configuration files under configs/."""

    def test_negative_control_loads(self):
        cfg = load_config(CONFIGS / "negative_control.yaml")
        assert cfg.fixture("c").sup == pytest.approx(1.2)
        assert cfg.suite_checks("index") == ["ellipticity", "fiber_factorization", "negative_controls"]
