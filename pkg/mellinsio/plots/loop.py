"""Boundary-symbol loop in the complex plane."""

from __future__ import annotations

from typing import Optional

import pandas as pd
from matplotlib.axes import Axes


def draw(ax: Axes, frame: pd.DataFrame, title: Optional[str] = None, **kwargs) -> None:
    """
    Draw a closed loop from its re/im columns and mark the origin.

    Args:
        ax: Target axes
        frame: Table with 're' and 'im' columns, first sample repeated last
        title: Optional panel title
    """
    for column in ("re", "im"):
        if column not in frame.columns:
            raise ValueError(f"loop data needs column '{column}'")
    ax.plot(frame["re"], frame["im"], **kwargs)
    ax.plot([frame["re"].iloc[0]], [frame["im"].iloc[0]], "o", color="0.3")
    ax.plot([0.0], [0.0], "x", color="#EE6677")
    ax.axhline(0.0, color="0.7", linewidth=0.5)
    ax.axvline(0.0, color="0.7", linewidth=0.5)
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    if title:
        ax.set_title(title)
