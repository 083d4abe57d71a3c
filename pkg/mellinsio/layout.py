"""
Panel layout for multi-panel verification figures using matplotlib GridSpec.
"""

from __future__ import annotations

from typing import List, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.axes import Axes  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from matplotlib.gridspec import GridSpec  # noqa: E402


def cm_to_in(cm: float) -> float:
    """Convert centimeters to inches."""
    return cm / 2.54


def _label(index: int) -> str:
    return chr(65 + index) if index < 26 else str(index + 1)


def build_canvas(
    n_panels: int,
    width_cm: float,
    height_cm: float,
    max_cols: int = 3,
    labels: bool = True,
    spacing: float = 0.35,
) -> Tuple[Figure, List[Axes]]:
    """
    Build a figure canvas with one axes per panel on a regular grid.

    Args:
        n_panels: Number of panels to create
        width_cm: Figure width in centimeters
        height_cm: Figure height in centimeters
        max_cols: Maximum number of columns
        labels: Put bold A, B, C... labels on the panels
        spacing: Space between panels as a fraction of the axes size

    Returns:
        Tuple of (Figure, List of Axes)
    """
    if n_panels < 1:
        raise ValueError(f"n_panels must be positive, got {n_panels}")
    fig = plt.figure(figsize=(cm_to_in(width_cm), cm_to_in(height_cm)))
    cols = min(max_cols, n_panels)
    rows = (n_panels + cols - 1) // cols
    gs = GridSpec(rows, cols, figure=fig, wspace=spacing, hspace=spacing)

    axes = []
    for i in range(n_panels):
        row, col = divmod(i, cols)
        ax = fig.add_subplot(gs[row, col])
        if labels and n_panels > 1:
            ax.text(
                -0.15,
                1.05,
                _label(i),
                transform=ax.transAxes,
                fontsize=9,
                fontweight="bold",
                va="bottom",
                ha="center",
            )
        axes.append(ax)
    return fig, axes
