"""Homotopy scan curves against mu."""

from __future__ import annotations

from typing import Optional

import pandas as pd
from matplotlib.axes import Axes

SCAN_COLUMNS = ("min_h", "residual", "vl_ratio", "lv_ratio")


def draw(ax: Axes, frame: pd.DataFrame, title: Optional[str] = None, **kwargs) -> None:
    """Plot min |h|, the regularizer residual and the compactness ratios over mu."""
    if "mu" not in frame.columns:
        raise ValueError("scan data needs column 'mu'")
    for column in SCAN_COLUMNS:
        if column in frame.columns:
            ax.semilogy(frame["mu"], frame[column].abs(), marker="o", label=column, **kwargs)
    if "winding" in frame.columns and (frame["winding"] != 0).any():
        bad = frame[frame["winding"] != 0]
        ax.plot(bad["mu"], bad["min_h"].abs(), "x", color="#EE6677", label="winding != 0")
    ax.set_xlabel("mu")
    ax.legend()
    if title:
        ax.set_title(title)
