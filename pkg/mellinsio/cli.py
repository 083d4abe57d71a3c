"""
Command-line interface for mellin-sio.

Runs the verification suites, writes their reports and plot data, and
merges reports into a summary. Exit codes: 0 when every check passes, 1 on
any FAIL, 2 on configuration or IO errors.
"""

from __future__ import annotations

import logging
import traceback
from pathlib import Path
from typing import List, NoReturn, Optional

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from .config import load_config
from .errors import ConfigurationError, MellinSIOError
from .loader import SymbolCache, load_metadata
from .report import emit_summary, write_suite
from .suites import SuiteReport, run_suite

app = typer.Typer(
    name="mellin-sio",
    help="Mellin operator calculus: numerical verification suites",
    no_args_is_help=True,
)

console = Console()

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
SUITE_FILES = ("identities.json", "pdo.json", "index.json")

ConfigOption = typer.Option(None, "--config", "-c", help="YAML run configuration")
GridOption = typer.Option(None, "--grid-n", help="Override n_t (n_x becomes n_t / 2)")
SeedOption = typer.Option(None, "--seed", help="Override the probe seed")
OutOption = typer.Option(Path("results"), "--out", "-o", help="Output directory")
CacheOption = typer.Option(False, "--cache", help="Cache sampled symbols under <out>/.cache")
VerboseOption = typer.Option(False, "--verbose", "-v", help="Debug logging and tracebacks")


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _abort(message: str, verbose: bool, code: int = EXIT_CONFIG) -> NoReturn:
    typer.echo(message, err=True)
    if verbose:
        traceback.print_exc()
    raise typer.Exit(code)


def _summary_table(report: SuiteReport) -> Table:
    table = Table(title=f"{report.suite} [{report.grid_hash}]  seed {report.seed}")
    table.add_column("check")
    table.add_column("value", justify="right")
    table.add_column("threshold", justify="right")
    table.add_column("status")
    table.add_column("time [s]", justify="right")
    for check in report.checks:
        style = "green" if check.passed else "bold red"
        table.add_row(
            check.name,
            "n/a" if check.value is None else f"{check.value:.3g}",
            "-" if check.threshold is None else f"{check.threshold:.1e}",
            f"[{style}]{check.status}[/{style}]",
            f"{check.wall_time:.2f}",
        )
    return table


def _run(
    suite: str,
    config: Optional[Path],
    grid_n: Optional[int],
    seed: Optional[int],
    out: Path,
    cache: bool,
    verbose: bool,
) -> None:
    _setup_logging(verbose)
    try:
        cfg = load_config(config).with_overrides(grid_n=grid_n, seed=seed)
    except ConfigurationError as exc:
        _abort(f"Configuration error: {exc}", verbose)

    try:
        symbol_cache = SymbolCache(out / ".cache") if cache else None
        report = run_suite(suite, cfg, cache=symbol_cache)
    except ConfigurationError as exc:
        _abort(f"Configuration error: {exc}", verbose)
    except MellinSIOError as exc:
        _abort(f"Error running suite '{suite}': {exc}", verbose, EXIT_FAIL)

    try:
        write_suite(report, out)
    except OSError as exc:
        _abort(f"Cannot write reports to {out}: {exc}", verbose)

    console.print(_summary_table(report))
    for note in report.notes:
        console.print(f"note: {note}")
    if report.passed:
        console.print(f"[green]{suite}: PASS[/green] ({len(report.checks)} checks)")
        raise typer.Exit(EXIT_PASS)
    console.print(f"[bold red]{suite}: FAIL[/bold red] ({', '.join(report.failed)})")
    raise typer.Exit(EXIT_FAIL)


@app.command()
def identities(
    config: Optional[Path] = ConfigOption,
    grid_n: Optional[int] = GridOption,
    seed: Optional[int] = SeedOption,
    out: Path = OutOption,
    cache: bool = CacheOption,
    verbose: bool = VerboseOption,
) -> None:
    """Transform round trips, s/r/p algebra and the multiplier-vs-PV cross-check."""
    _run("identities", config, grid_n, seed, out, cache, verbose)


@app.command()
def pdo(
    config: Optional[Path] = ConfigOption,
    grid_n: Optional[int] = GridOption,
    seed: Optional[int] = SeedOption,
    out: Path = OutOption,
    cache: bool = CacheOption,
    verbose: bool = VerboseOption,
) -> None:
    """PDO realizations, shift checks, Neumann series and compactness proxies."""
    _run("pdo", config, grid_n, seed, out, cache, verbose)


@app.command()
def index(
    config: Optional[Path] = ConfigOption,
    grid_n: Optional[int] = GridOption,
    seed: Optional[int] = SeedOption,
    out: Path = OutOption,
    cache: bool = CacheOption,
    verbose: bool = VerboseOption,
) -> None:
    """Disk containment, ellipticity, the mu homotopy scan and the regularizers of W."""
    _run("index", config, grid_n, seed, out, cache, verbose)


@app.command()
def report(
    paths: Optional[List[Path]] = typer.Argument(None, help="Suite reports or summaries to merge"),
    out: Path = OutOption,
    figures: bool = typer.Option(False, "--figures", help="Render figures from the plot data"),
    style: str = typer.Option("default", "--style", help="Figure style preset"),
    verbose: bool = VerboseOption,
) -> None:
    """
    Merge suite reports into <out>/summary.json.

    Without PATHS the suite reports already in --out are merged.
    """
    _setup_logging(verbose)
    if not paths:
        paths = [out / name for name in SUITE_FILES if (out / name).is_file()]
        if not paths:
            _abort(f"No suite reports found in {out}", verbose)

    try:
        summary_path = emit_summary(paths, out)
        summary = load_metadata(summary_path)
    except ConfigurationError as exc:
        _abort(f"Report error: {exc}", verbose)
    except OSError as exc:
        _abort(f"Cannot write summary to {out}: {exc}", verbose)

    if figures:
        from .figures import render_figures

        try:
            written = render_figures(out, style=style)
        except (ValueError, OSError) as exc:
            _abort(f"Figure rendering failed: {exc}", verbose)
        console.print(f"rendered {len(written)} figures")

    table = Table(title=f"summary: {summary_path}")
    table.add_column("suite")
    table.add_column("checks", justify="right")
    table.add_column("verdict")
    for name, section in summary["sections"].items():
        table.add_row(name, str(len(section["checks"])), section["verdict"])
    console.print(table)
    raise typer.Exit(EXIT_PASS if summary["verdict"] == "PASS" else EXIT_FAIL)


if __name__ == "__main__":
    app()
