"""Singular value decay curves on a log scale."""

from __future__ import annotations

from typing import Optional

import numpy as np
import pandas as pd
from matplotlib.axes import Axes


def draw(
    ax: Axes,
    frame: pd.DataFrame,
    title: Optional[str] = None,
    threshold: Optional[float] = 1e-3,
    **kwargs,
) -> None:
    """
    Plot sigma_k / sigma_1 against k.

    A frame with a 'relative' column holds one curve; otherwise every column
    except 'k' is drawn as a labelled curve.
    """
    if "k" not in frame.columns:
        raise ValueError("singular value data needs column 'k'")
    k = frame["k"].to_numpy()
    if "relative" in frame.columns:
        curves = {"sigma_k / sigma_1": frame["relative"]}
    else:
        curves = {c: frame[c] for c in frame.columns if c != "k"}
    floor = np.finfo(float).tiny
    for label, values in curves.items():
        ax.semilogy(k, np.maximum(values.to_numpy(dtype=float), floor), label=label, **kwargs)
    if threshold is not None:
        n = int(k.max()) if k.size else 0
        ax.axhline(threshold, color="0.5", linestyle="--", linewidth=0.6)
        if n >= 8:
            ax.axvline(n // 8, color="0.5", linestyle=":", linewidth=0.6)
    ax.set_xlabel("k")
    ax.set_ylabel("sigma_k / sigma_1")
    if len(curves) > 1:
        ax.legend()
    if title:
        ax.set_title(title)
