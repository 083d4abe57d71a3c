"""
Render offline figures from the CSV plot data of a run.
"""

from __future__ import annotations

import importlib
import logging
from collections import defaultdict
from pathlib import Path
from types import ModuleType
from typing import Dict, List, Optional, Tuple, Union

import matplotlib.pyplot as plt
import pandas as pd
from matplotlib.figure import Figure

from .layout import build_canvas
from .loader import load_table
from .report import plot_files
from .styles import apply_style

logger = logging.getLogger(__name__)

# frame-name prefix -> plot module under mellinsio.plots
FIGURE_KINDS = {
    "loop_": "loop",
    "sv_": "sv_decay",
    "mu_scan": "mu_scan",
}


def figure_kind(frame_name: str) -> Optional[str]:
    for prefix, kind in FIGURE_KINDS.items():
        if frame_name.startswith(prefix):
            return kind
    return None


def _drawer(kind: str) -> ModuleType:
    return importlib.import_module(f"mellinsio.plots.{kind}")


def draw_overview(
    suite: str,
    frames: List[Tuple[str, pd.DataFrame]],
    width_cm: float = 9.0,
    height_cm: float = 7.0,
    max_cols: int = 3,
) -> Figure:
    """
    One labeled panel per plot frame of a suite.

    Each panel keeps the size of a single figure, so the canvas grows with
    the number of rows and columns.

    Raises:
        ValueError: If there is no frame or a frame has no drawer
    """
    if not frames:
        raise ValueError(f"suite '{suite}' has no plot frames")
    cols = min(max_cols, len(frames))
    rows = (len(frames) + cols - 1) // cols
    fig, axes = build_canvas(len(frames), width_cm * cols, height_cm * rows, max_cols=max_cols)
    for ax, (name, frame) in zip(axes, frames):
        kind = figure_kind(name)
        if kind is None:
            plt.close(fig)
            raise ValueError(f"no drawer for plot frame '{name}'")
        _drawer(kind).draw(ax, frame, title=name)
    fig.suptitle(suite)
    return fig


def render_figures(
    plot_dir: Union[str, Path],
    out_dir: Optional[Union[str, Path]] = None,
    style: str = "default",
    fmt: str = "png",
    width_cm: float = 9.0,
    height_cm: float = 7.0,
    overview: bool = True,
) -> List[Path]:
    """
    Draw one figure per loop, singular-value or mu-scan CSV in plot_dir.

    Files are named after their data, ``<suite>.<frame>.<fmt>``. Frames of
    other kinds are skipped. With ``overview`` every suite with two or more
    drawable frames also gets ``<suite>.overview.<fmt>`` holding all of them
    as labeled panels.

    Returns:
        Paths of the figures written
    """
    plot_dir = Path(plot_dir)
    out = Path(out_dir) if out_dir is not None else plot_dir
    out.mkdir(parents=True, exist_ok=True)
    apply_style(style)

    written = []
    by_suite: Dict[str, List[Tuple[str, pd.DataFrame]]] = defaultdict(list)
    for csv in plot_files(plot_dir):
        suite, frame_name = csv.stem.split(".", 1)
        kind = figure_kind(frame_name)
        if kind is None:
            continue
        frame = load_table(csv)
        by_suite[suite].append((frame_name, frame))
        fig, (ax,) = build_canvas(1, width_cm, height_cm)
        try:
            _drawer(kind).draw(ax, frame, title=f"{suite}: {frame_name}")
            path = out / f"{csv.stem}.{fmt}"
            fig.savefig(path)
            written.append(path)
        finally:
            plt.close(fig)
        logger.debug("rendered %s", path)

    if overview:
        for suite, frames in sorted(by_suite.items()):
            if len(frames) < 2:
                continue
            fig = draw_overview(suite, frames, width_cm, height_cm)
            try:
                path = out / f"{suite}.overview.{fmt}"
                fig.savefig(path)
                written.append(path)
            finally:
                plt.close(fig)
    logger.info("rendered %d figures into %s", len(written), out)
    return written
