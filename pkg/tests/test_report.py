"""Tests for suite report files and summary merging."""

import numpy as np
import pandas as pd
import pytest

from mellinsio.errors import ConfigurationError
from mellinsio.fredholm import BoundaryLoop
from mellinsio.grid import GridSpec
from mellinsio.loader import load_metadata, load_operator, load_table, save_metadata
from mellinsio.operators import identity
from mellinsio.report import emit_summary, merge_reports, plot_files, write_suite
from mellinsio.suites import CheckRecord, SuiteReport, loop_frame

TINY = GridSpec(n_t=8, n_x=8)


def _report(suite: str, passed: bool = True) -> SuiteReport:
    theta = np.linspace(0.0, 2.0 * np.pi, 16, endpoint=False)
    return SuiteReport(
        suite=suite,
        fixtures=["c", "d"],
        grid=TINY,
        seed=0,
        checks=[
            CheckRecord("first", 1e-10, 1e-8, True, wall_time=0.5),
            CheckRecord("second", None if not passed else 0.1, 1.0, passed, "detail", 0.25),
        ],
        plot_data={"loop_h": loop_frame(BoundaryLoop(1.0 + 0.5 * np.exp(1j * theta)))},
        operators={"V": identity(TINY)},
    )


class TestWriteSuite:
    """Test the files written for one suite."""

    def test_files(self, tmp_path):
        written = write_suite(_report("index"), tmp_path)
        names = sorted(p.name for p in written)
        assert names == ["index.V.mop", "index.json", "index.loop_h.csv", "index.timing.csv"]
        assert written[0].name == "index.json"

    def test_json_contents(self, tmp_path):
        write_suite(_report("index", passed=False), tmp_path)
        doc = load_metadata(tmp_path / "index.json")
        assert doc["verdict"] == "FAIL"
        assert doc["checks"][1] == {
            "name": "second",
            "value": None,
            "threshold": 1.0,
            "status": "FAIL",
            "detail": "detail",
        }
        assert doc["grid_hash"] == TINY.grid_hash()

    def test_timing_table(self, tmp_path):
        write_suite(_report("pdo"), tmp_path)
        frame = load_table(tmp_path / "pdo.timing.csv")
        assert frame["wall_time_s"].tolist() == [0.5, 0.25]

    def test_operator_file(self, tmp_path):
        write_suite(_report("index"), tmp_path)
        np.testing.assert_array_equal(load_operator(tmp_path / "index.V.mop").matrix, np.eye(8))

    def test_loop_frame_is_closed(self, tmp_path):
        write_suite(_report("index"), tmp_path)
        frame = load_table(tmp_path / "index.loop_h.csv")
        assert frame[["re", "im"]].iloc[0].tolist() == pytest.approx(frame[["re", "im"]].iloc[-1].tolist())

    def test_plot_files_skip_timing(self, tmp_path):
        write_suite(_report("index"), tmp_path)
        assert [p.name for p in plot_files(tmp_path)] == ["index.loop_h.csv"]


class TestMerge:
    """Test summary merging."""

    def _write_all(self, tmp_path, failing=None):
        paths = []
        for suite in ("identities", "pdo", "index"):
            write_suite(_report(suite, passed=suite != failing), tmp_path)
            paths.append(tmp_path / f"{suite}.json")
        return paths

    def test_three_sections(self, tmp_path):
        summary = merge_reports(self._write_all(tmp_path))
        assert summary["suites"] == ["identities", "index", "pdo"]
        assert summary["verdict"] == "PASS"
        assert summary["n_checks"] == 6
        assert summary["failed"] == []

    def test_failure_is_listed(self, tmp_path):
        summary = merge_reports(self._write_all(tmp_path, failing="pdo"))
        assert summary["verdict"] == "FAIL"
        assert summary["failed"] == ["pdo/second"]

    def test_merge_is_idempotent(self, tmp_path):
        summary = merge_reports(self._write_all(tmp_path))
        save_metadata(tmp_path / "summary.json", summary)
        assert merge_reports([tmp_path / "summary.json"]) == summary
        assert merge_reports([tmp_path / "summary.json", tmp_path / "pdo.json"]) == summary

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="not found"):
            merge_reports([tmp_path / "absent.json"])

    def test_unknown_document(self, tmp_path):
        save_metadata(tmp_path / "other.json", {"hello": 1})
        with pytest.raises(ConfigurationError, match="neither"):
            merge_reports([tmp_path / "other.json"])

    def test_nothing_to_merge(self):
        with pytest.raises(ConfigurationError):
            merge_reports([])


class TestEmitSummary:
    """Test summary emission and plot data gathering."""

    def test_copies_plot_data(self, tmp_path):
        runs = tmp_path / "runs"
        write_suite(_report("index"), runs)
        out = tmp_path / "out"
        path = emit_summary([runs / "index.json"], out)
        assert path == out / "summary.json"
        assert (out / "index.loop_h.csv").is_file()
        assert not (out / "index.timing.csv").exists()
        pd.testing.assert_frame_equal(load_table(out / "index.loop_h.csv"), load_table(runs / "index.loop_h.csv"))

    def test_in_place(self, tmp_path):
        write_suite(_report("index"), tmp_path)
        emit_summary([tmp_path / "index.json"], tmp_path)
        assert load_metadata(tmp_path / "summary.json")["suites"] == ["index"]
