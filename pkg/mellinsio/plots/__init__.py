"""
Plot renderers for verification figures.

Each module exposes ``draw(ax, frame, title=None, **kwargs)`` taking the
plot-data frame a suite emitted.
"""

from .loop import draw as draw_loop
from .mu_scan import draw as draw_mu_scan
from .sv_decay import draw as draw_sv_decay

__all__ = [
    "draw_loop",
    "draw_mu_scan",
    "draw_sv_decay",
]
