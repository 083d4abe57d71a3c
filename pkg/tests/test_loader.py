"""Tests for report, table and operator serialization."""

import json

import numpy as np
import pandas as pd
import pytest

from mellinsio.errors import ConfigurationError, InvalidInputError
from mellinsio.grid import GridFunction, GridSpec
from mellinsio.loader import (
    SymbolCache,
    fingerprint,
    grid_function_frame,
    load_grid_function,
    load_metadata,
    load_operator,
    load_symbol,
    load_table,
    params_key,
    read_mop,
    save_grid_function,
    save_metadata,
    save_operator,
    save_symbol,
    save_table,
    write_mop,
)
from mellinsio.operators import DenseOperator
from mellinsio.symbols import BivariateSymbol

TINY = GridSpec(n_t=64, n_x=32)


class TestMetadata:
    """Test JSON report IO."""

    def test_round_trip_sorted(self, tmp_path):
        path = tmp_path / "sub" / "report.json"
        save_metadata(path, {"b": 1, "a": [1.5, None]})
        assert load_metadata(path) == {"a": [1.5, None], "b": 1}
        assert path.read_text().index('"a"') < path.read_text().index('"b"')

    def test_missing(self, tmp_path):
        with pytest.raises(ConfigurationError, match="not found"):
            load_metadata(tmp_path / "nope.json")

    def test_invalid_json_has_line(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n  "a": 1,\n  oops\n}\n')
        with pytest.raises(ConfigurationError) as exc:
            load_metadata(path)
        assert exc.value.line == 3

    def test_params_key_ignores_order(self):
        assert params_key({"a": 1, "b": 2}) == params_key({"b": 2, "a": 1})

    def test_fingerprint(self, tmp_path):
        path = tmp_path / "f.txt"
        path.write_text("data")
        assert fingerprint(path) == fingerprint(path)
        assert fingerprint(path).size == 4


class TestTables:
    """Test CSV tables."""

    def test_round_trip(self, tmp_path):
        frame = pd.DataFrame({"x": [1.0, 2.0], "y": [3.0, 4.0]})
        save_table(tmp_path / "t.csv", frame)
        pd.testing.assert_frame_equal(load_table(tmp_path / "t.csv"), frame)

    def test_unsupported_format(self, tmp_path):
        with pytest.raises(ValueError, match="Unsupported"):
            load_table(tmp_path / "t.xlsx")


class TestSampleExports:
    """Test CSV exports of grid functions and symbols."""

    def test_grid_function_round_trip(self, tmp_path, small_grid):
        f = GridFunction.from_callable(small_grid, lambda t: np.exp(-np.log(t) ** 2 + 1j * np.log(t)))
        save_grid_function(tmp_path / "f.csv", f)
        assert list(load_table(tmp_path / "f.csv").columns) == ["t", "Re", "Im"]
        back = load_grid_function(tmp_path / "f.csv", small_grid)
        np.testing.assert_array_equal(back.samples, f.samples)

    def test_grid_function_on_other_grid(self, tmp_path, small_grid):
        save_grid_function(tmp_path / "f.csv", GridFunction(TINY, np.ones(TINY.n_t)))
        with pytest.raises(InvalidInputError, match="t column"):
            load_grid_function(tmp_path / "f.csv", small_grid)

    def test_missing_column(self, tmp_path):
        frame = grid_function_frame(GridFunction(TINY, np.ones(TINY.n_t))).drop(columns="Im")
        save_table(tmp_path / "f.csv", frame)
        with pytest.raises(InvalidInputError, match="Im"):
            load_grid_function(tmp_path / "f.csv", TINY)

    def test_symbol_round_trip(self, tmp_path):
        rng = np.random.default_rng(2)
        shape = (TINY.n_t, TINY.n_x)
        a = BivariateSymbol(
            spec=TINY,
            values=rng.standard_normal(shape) + 1j * rng.standard_normal(shape),
            boundary_minus=rng.standard_normal(TINY.n_t),
            boundary_plus=1j * rng.standard_normal(TINY.n_t),
            name="a",
        )
        save_symbol(tmp_path / "a.csv", a)
        frame = load_table(tmp_path / "a.csv")
        assert list(frame.columns) == ["t", "x", "Re", "Im"]
        assert len(frame) == TINY.n_t * (TINY.n_x + 2)
        back = load_symbol(tmp_path / "a.csv", TINY, "a")
        np.testing.assert_array_equal(back.values, a.values)
        np.testing.assert_array_equal(back.boundary_minus, a.boundary_minus)
        np.testing.assert_array_equal(back.boundary_plus, a.boundary_plus)

    def test_symbol_row_count_checked(self, tmp_path):
        a = BivariateSymbol(TINY, np.ones((TINY.n_t, TINY.n_x)), 1.0, 1.0)
        save_symbol(tmp_path / "a.csv", a)
        with pytest.raises(InvalidInputError, match="rows"):
            load_symbol(tmp_path / "a.csv", GridSpec(n_t=64, n_x=64))


class TestMop:
    """Test the .mop operator format."""

    def test_operator_round_trip(self, tmp_path, small_grid):
        rng = np.random.default_rng(1)
        n = small_grid.n_t
        op = DenseOperator(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)), small_grid, "R")
        save_operator(tmp_path / "r.mop", op)
        back = load_operator(tmp_path / "r.mop")
        np.testing.assert_array_equal(back.matrix, op.matrix)
        assert back.grid == small_grid
        assert back.provenance == "R"

    def test_header(self, tmp_path, small_grid):
        write_mop(tmp_path / "m.mop", np.eye(3), small_grid, "I3")
        matrix, header = read_mop(tmp_path / "m.mop")
        assert header["grid_hash"] == small_grid.grid_hash()
        assert matrix.shape == (3, 3)

    def test_missing_header(self, tmp_path):
        (tmp_path / "x.mop").write_bytes(b"no newline here")
        with pytest.raises(InvalidInputError, match="header"):
            read_mop(tmp_path / "x.mop")

    def test_wrong_magic(self, tmp_path):
        (tmp_path / "x.mop").write_bytes(b'{"format": "other"}\n')
        with pytest.raises(InvalidInputError, match="not a .mop"):
            read_mop(tmp_path / "x.mop")

    def test_truncated_payload(self, tmp_path):
        write_mop(tmp_path / "m.mop", np.eye(3))
        raw = (tmp_path / "m.mop").read_bytes()
        (tmp_path / "m.mop").write_bytes(raw[:-16])
        with pytest.raises(InvalidInputError, match="payload"):
            read_mop(tmp_path / "m.mop")

    def test_grid_hash_mismatch(self, tmp_path, small_grid):
        save_operator(tmp_path / "r.mop", DenseOperator(np.eye(small_grid.n_t), small_grid))
        raw = (tmp_path / "r.mop").read_bytes()
        head, _, body = raw.partition(b"\n")
        header = json.loads(head)
        header["grid_hash"] = "0" * 16
        (tmp_path / "r.mop").write_bytes(json.dumps(header).encode() + b"\n" + body)
        with pytest.raises(InvalidInputError, match="hash"):
            load_operator(tmp_path / "r.mop")

    def test_operator_without_grid(self, tmp_path):
        write_mop(tmp_path / "m.mop", np.eye(3))
        with pytest.raises(InvalidInputError, match="no grid"):
            load_operator(tmp_path / "m.mop")


class TestSymbolCache:
    """Test the on-disk symbol cache."""

    def test_hit_after_miss(self, tmp_path):
        cache = SymbolCache(tmp_path / ".cache")
        calls = []

        def build():
            calls.append(1)
            return np.arange(6.0).reshape(2, 3)

        first = cache.fetch({"name": "s", "y": 2.0}, build)
        second = cache.fetch({"y": 2.0, "name": "s"}, build)
        np.testing.assert_array_equal(first, second)
        assert (cache.hits, cache.misses, len(calls)) == (1, 1, 1)
        assert cache.path_for({"name": "s", "y": 2.0}).is_file()
