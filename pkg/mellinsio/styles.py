"""
Matplotlib style presets for offline verification figures.

Figures are rendered from CSV plot data after a run, so the presets only
touch rcParams and never the numerics.
"""

from __future__ import annotations

from typing import Any, Dict, List

import matplotlib as mpl
from cycler import cycler

# Colorblind-safe palettes
PALETTES = {
    "cb_safe": ["#4477AA", "#EE6677", "#228833", "#CCBB44", "#66CCEE", "#AA3377", "#BBBBBB"],
    "paul_tol": ["#332288", "#117733", "#44AA99", "#88CCEE", "#DDCC77", "#CC6677", "#AA4499", "#882255"],
}


RC_BASE: Dict[str, Any] = {
    "figure.dpi": 150,
    "savefig.dpi": 300,
    "savefig.bbox": "tight",
    "savefig.pad_inches": 0.05,
    # Typography
    "font.family": "sans-serif",
    "font.sans-serif": ["DejaVu Sans", "Arial", "Helvetica", "sans-serif"],
    "font.size": 8,
    "mathtext.fontset": "dejavusans",
    # Axes
    "axes.titlesize": 8,
    "axes.labelsize": 7,
    "axes.linewidth": 0.8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    # Ticks
    "xtick.labelsize": 6,
    "ytick.labelsize": 6,
    "xtick.direction": "out",
    "ytick.direction": "out",
    # Legend
    "legend.fontsize": 6,
    "legend.frameon": False,
    "legend.handlelength": 1.2,
    # Lines
    "lines.linewidth": 1.0,
    "lines.markersize": 3,
    # Grid
    "grid.linewidth": 0.4,
    "grid.alpha": 0.3,
}


STYLES: Dict[str, Dict[str, Any]] = {
    "default": {},
    "paper": {
        "font.size": 7,
        "axes.labelsize": 7,
        "axes.titlesize": 7,
        "axes.linewidth": 0.6,
        "lines.linewidth": 0.8,
        "axes.grid": False,
    },
    "screen": {
        "figure.dpi": 100,
        "font.size": 10,
        "axes.titlesize": 10,
        "axes.labelsize": 9,
        "xtick.labelsize": 8,
        "ytick.labelsize": 8,
        "legend.fontsize": 8,
    },
}


def apply_style(name: str = "default", palette: str = "cb_safe") -> None:
    """
    Apply a style preset and color cycle to matplotlib.

    Args:
        name: Preset name ('default', 'paper', 'screen')
        palette: Palette used for the color cycle
    """
    if name not in STYLES:
        raise ValueError(f"Unknown style '{name}'. Available: {list(STYLES.keys())}")
    rc = RC_BASE.copy()
    rc.update(STYLES[name])
    rc["axes.prop_cycle"] = cycler(color=get_palette(palette))
    mpl.rcParams.update(rc)


def get_palette(name: str) -> List[str]:
    if name not in PALETTES:
        raise ValueError(f"Unknown palette '{name}'. Available: {list(PALETTES.keys())}")
    return PALETTES[name].copy()
