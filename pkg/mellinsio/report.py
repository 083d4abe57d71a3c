"""
Suite report emission and merging.

A suite run writes ``<suite>.json`` (deterministic), ``<suite>.timing.csv``,
one ``<suite>.<frame>.csv`` per plot-data frame and ``<suite>.<name>.mop``
per stored operator. ``merge_reports`` folds suite reports, or earlier
summaries, into one summary with a section per suite.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Union

from .errors import ConfigurationError
from .loader import load_metadata, load_table, save_metadata, save_operator, save_table
from .suites import SuiteReport

logger = logging.getLogger(__name__)

SUMMARY_FORMAT = "mellin-sio/summary"
SUMMARY_NAME = "summary.json"
TIMING_SUFFIX = ".timing.csv"

PathLike = Union[str, Path]


def write_suite(report: SuiteReport, out_dir: PathLike) -> List[Path]:
    """
    Write every artifact of one suite run into out_dir.

    Returns:
        Paths written, the JSON report first
    """
    out = Path(out_dir)
    suite = report.suite
    json_path = out / f"{suite}.json"
    save_metadata(json_path, report.to_dict())
    written = [json_path]

    timing_path = out / f"{suite}{TIMING_SUFFIX}"
    save_table(timing_path, report.timing_frame())
    written.append(timing_path)

    for name in sorted(report.plot_data):
        path = out / f"{suite}.{name}.csv"
        save_table(path, report.plot_data[name])
        written.append(path)

    for name in sorted(report.operators):
        path = out / f"{suite}.{name}.mop"
        save_operator(path, report.operators[name])
        written.append(path)

    logger.info("wrote %d files for suite '%s' to %s", len(written), suite, out)
    return written


def _sections(doc: Any, path: Path) -> Dict[str, Dict[str, Any]]:
    if isinstance(doc, dict) and doc.get("format") == SUMMARY_FORMAT:
        return dict(doc.get("sections", {}))
    if isinstance(doc, dict) and "suite" in doc and "checks" in doc:
        return {doc["suite"]: doc}
    raise ConfigurationError(f"{path}: neither a suite report nor a summary")


def merge_reports(paths: Iterable[PathLike]) -> Dict[str, Any]:
    """
    Merge suite reports and summaries into one summary.

    Summaries are flattened into their sections, so merging a summary again
    reproduces it. A later file wins when two carry the same suite.

    Raises:
        ConfigurationError: If a file is missing, unreadable or of unknown shape
    """
    sections: Dict[str, Dict[str, Any]] = {}
    for p in paths:
        path = Path(p)
        sections.update(_sections(load_metadata(path), path))
    if not sections:
        raise ConfigurationError("no reports to merge")

    ordered = {name: sections[name] for name in sorted(sections)}
    failed = [
        f"{name}/{check['name']}"
        for name, section in ordered.items()
        for check in section.get("checks", [])
        if check.get("status") != "PASS"
    ]
    return {
        "format": SUMMARY_FORMAT,
        "verdict": "FAIL" if failed else "PASS",
        "suites": list(ordered),
        "n_checks": sum(len(s.get("checks", [])) for s in ordered.values()),
        "failed": failed,
        "sections": ordered,
    }


def plot_files(directory: PathLike, suite: str = "*") -> List[Path]:
    """Plot-data CSV files in a directory, timing tables excluded."""
    return sorted(
        p for p in Path(directory).glob(f"{suite}.*.csv") if not p.name.endswith(TIMING_SUFFIX)
    )


def emit_summary(paths: Iterable[PathLike], out_dir: PathLike) -> Path:
    """
    Merge reports into ``<out_dir>/summary.json`` and gather their plot data.

    Plot-data CSV files next to each suite report are copied into out_dir
    when they are not there already.
    """
    paths = [Path(p) for p in paths]
    summary = merge_reports(paths)
    out = Path(out_dir)
    for path in paths:
        for suite in summary["suites"]:
            for csv in plot_files(path.parent, suite):
                target = out / csv.name
                if target.resolve() != csv.resolve():
                    save_table(target, load_table(csv))
    summary_path = out / SUMMARY_NAME
    save_metadata(summary_path, summary)
    return summary_path
