"""
Grid refinement of the algebra, realization, fiber-factorization and index
verdicts.

The same measurements are taken on a grid and on its refinement with n_t
and n_x doubled. Everything is applied to a few smooth test functions through
FFT convolutions, sparse shifts and chunked PDO application, so the refined
grid never holds an n_t x n_t matrix.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd

from .config import Thresholds
from .constructions import (
    BinomialData,
    apply_L,
    apply_V,
    binomial_apply,
    fiber_factorization_defect,
    h_fiber_rows,
    regularizer_symbol_f,
    symbol_binomial_inverse_R,
    symbol_binomial_R,
    symbol_shift_R,
)
from .fredholm import loop_from_rows, winding_report
from .grid import GridSpec
from .operators import conv_apply, interior_probes, pdo_apply, window_defect
from .shifts import neumann_matrix, shift_sparse
from .symbols import make_p_y, make_r_y, r_y_values, s_y_values

logger = logging.getLogger(__name__)


def refined_grid(grid: GridSpec, factor: int = 2) -> GridSpec:
    """Same log interval and x-range with n_t and n_x multiplied by ``factor``."""
    return grid.model_copy(update={"n_t": factor * grid.n_t, "n_x": factor * grid.n_x})


@dataclass
class GridVerdict:
    """One measured quantity on one grid against its threshold."""

    name: str
    value: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.threshold)


@dataclass
class RefinementReport:
    """Verdicts on a grid and on its refinement, keyed by measurement name."""

    grid: GridSpec
    fine: GridSpec
    coarse: Dict[str, GridVerdict]
    refined: Dict[str, GridVerdict]

    @property
    def mismatches(self) -> List[str]:
        return [name for name, v in self.coarse.items() if v.passed != self.refined[name].passed]

    @property
    def stable(self) -> bool:
        return not self.mismatches

    def to_frame(self) -> pd.DataFrame:
        names = list(self.coarse)
        return pd.DataFrame(
            {
                "name": names,
                "threshold": [self.coarse[n].threshold for n in names],
                "value": [self.coarse[n].value for n in names],
                "value_refined": [self.refined[n].value for n in names],
                "passed": [self.coarse[n].passed for n in names],
                "passed_refined": [self.refined[n].passed for n in names],
            }
        )


def algebra_verdicts(
    grid: GridSpec, y_values: Sequence[float], limits: Thresholds, samples: np.ndarray
) -> List[GridVerdict]:
    """Pointwise p/r algebra on the x-grid and its operator form on the test functions."""
    x = grid.x
    rows = grid.interior_mask()
    cols = samples.T
    pointwise, operator = 0.0, 0.0
    for y in y_values:
        s, r = s_y_values(y, x), r_y_values(y, x)
        plus, minus, quarter = 0.5 * (1.0 + s), 0.5 * (1.0 - s), 0.25 * r * r
        pointwise = max(
            pointwise,
            float(np.max(np.abs(s * s - r * r - 1.0))),
            float(np.max(np.abs(plus * minus + quarter))),
            float(np.max(np.abs(plus * plus - plus - quarter))),
            float(np.max(np.abs(minus * minus - minus - quarter))),
        )
        p_plus, p_minus, r_y = make_p_y(y, "+", grid), make_p_y(y, "-", grid), make_r_y(y, grid)
        pc, mc = conv_apply(p_plus, cols), conv_apply(p_minus, cols)
        rr = 0.25 * conv_apply(r_y, conv_apply(r_y, cols))
        for diff in (
            conv_apply(p_plus, mc) + rr,
            conv_apply(p_plus, pc) - pc - rr,
            conv_apply(p_minus, mc) - mc - rr,
            pc + mc - cols,
        ):
            operator = max(operator, window_defect(diff, samples, rows))
    return [
        GridVerdict("algebra_pointwise", pointwise, limits.algebra_pointwise),
        GridVerdict("algebra_operator", operator, limits.algebra_operator),
    ]


def realization_verdicts(
    binomials: Sequence[BinomialData], limits: Thresholds, samples: np.ndarray, tol: float = 1e-10
) -> List[GridVerdict]:
    """U R_y against Op(d), (I - v U) R_y against Op(a) and the Neumann route against Op(c)."""
    shift_err, binomial_err, series_err = 0.0, 0.0, 0.0
    cols = samples.T
    for d in binomials:
        grid = d.grid
        rows = grid.interior_mask()
        r_cols = conv_apply(make_r_y(d.y, grid), cols)
        shifted = shift_sparse(d.gamma, grid, d.epsilon) @ r_cols
        shift_err = max(shift_err, window_defect(shifted - pdo_apply(symbol_shift_R(d), cols), samples, rows))
        direct = binomial_apply(d, r_cols)
        binomial_err = max(
            binomial_err, window_defect(direct - pdo_apply(symbol_binomial_R(d), cols), samples, rows)
        )
        series, _ = symbol_binomial_inverse_R(d, tol)
        solved = neumann_matrix(d.v, d.gamma, grid, r_cols, tol, d.mu, d.epsilon)
        series_err = max(series_err, window_defect(solved - pdo_apply(series, cols), samples, rows))
    return [
        GridVerdict("shift_realization", shift_err, limits.realization),
        GridVerdict("binomial_realization", binomial_err, limits.realization),
        GridVerdict("neumann_vs_series", series_err, limits.neumann_series),
    ]


def fiber_verdict(dc: BinomialData, dd: BinomialData, limits: Thresholds, tol: float = 1e-10) -> GridVerdict:
    cc, _ = symbol_binomial_inverse_R(dc, tol)
    cd, _ = symbol_binomial_inverse_R(dd, tol)
    return GridVerdict("fiber_factorization", fiber_factorization_defect(dc, dd, cc, cd), limits.fiber_factorization)


def index_verdicts(
    dc: BinomialData,
    dd: BinomialData,
    limits: Thresholds,
    samples: np.ndarray,
    steps: int = 11,
    tol: float = 1e-10,
) -> List[GridVerdict]:
    """
    Ellipticity and winding of h along the mu-scan, V at mu = 0 and the
    residual V (L Op(f)) - I at mu = 1.

    Ellipticity and windings only need the fiber rows of h, whose boundary
    columns are identically 1.
    """
    grid = dc.grid
    ones = np.ones(grid.n_t, dtype=complex)
    min_h, worst_winding, residue = np.inf, 0, 0.0
    for mu in np.linspace(0.0, 1.0, steps):
        dcm, ddm = dc.with_params(mu=float(mu), y=2.0), dd.with_params(mu=float(mu), y=2.0)
        rows = {(row.label, row.index): row.values for row in h_fiber_rows(dcm, ddm)}
        min_h = min(min_h, 1.0, min(float(np.min(np.abs(v))) for v in rows.values()))
        for index in sorted({idx for _, idx in rows}):
            loop = loop_from_rows(rows[("zero", index)], rows[("infinity", index)], ones, ones, f"h#{index}")
            rep = winding_report(loop, limits.eps_wind)
            worst_winding = max(worst_winding, abs(rep.winding))
            residue = max(residue, rep.residue)
    elliptic = min_h > limits.ellipticity and residue < limits.winding_residue
    # a non-elliptic or unresolved loop must not read as index zero
    winding_value = float(worst_winding) if elliptic else np.inf

    rows_mask = grid.interior_mask()
    cols = samples.T.astype(complex)
    dc0, dd0 = dc.with_params(mu=0.0, y=2.0), dd.with_params(mu=0.0, y=2.0)
    at_zero = window_defect(apply_V(dc0, dd0, cols) - cols, samples, rows_mask)

    dc1, dd1 = dc.with_params(mu=1.0, y=2.0), dd.with_params(mu=1.0, y=2.0)
    f = regularizer_symbol_f(dc1, dd1, tol)
    chained = apply_V(dc1, dd1, apply_L(dc1, dd1, pdo_apply(f, cols), tol))
    residual = window_defect(chained - cols, samples, rows_mask)
    return [
        GridVerdict("index_zero", winding_value, 0.0),
        GridVerdict("identity_at_zero", at_zero, limits.identity_at_zero),
        GridVerdict("scan_residual", residual, limits.scan_residual),
    ]


def grid_verdicts(
    dc: BinomialData,
    dd: BinomialData,
    binomials: Sequence[BinomialData],
    limits: Thresholds,
    y_values: Sequence[float],
    steps: int = 11,
    tol: float = 1e-10,
    seed: int = 0,
) -> Dict[str, GridVerdict]:
    """All refinement verdicts on the grid the binomial data live on."""
    grid = dc.grid
    samples = interior_probes(grid, seed=seed)
    verdicts = algebra_verdicts(grid, y_values, limits, samples)
    verdicts += realization_verdicts(binomials, limits, samples, tol)
    verdicts.append(fiber_verdict(dc.with_params(y=2.0), dd.with_params(y=2.0), limits, tol))
    verdicts += index_verdicts(dc, dd, limits, samples, steps, tol)
    for v in verdicts:
        logger.debug("n_t=%d %s: %.3g (threshold %.3g)", grid.n_t, v.name, v.value, v.threshold)
    return {v.name: v for v in verdicts}


def grid_stability(
    dc: BinomialData,
    dd: BinomialData,
    binomials: Sequence[BinomialData],
    limits: Thresholds,
    y_values: Sequence[float],
    steps: int = 11,
    tol: float = 1e-10,
    seed: int = 0,
    factor: int = 2,
) -> RefinementReport:
    """
    Compare the verdicts on the grid of ``dc`` with those on its refinement.

    The test functions are drawn with the same seed on both grids and the thresholds
    are the same, so only the resolution changes.
    """
    grid = dc.grid
    fine = refined_grid(grid, factor)
    coarse = grid_verdicts(dc, dd, binomials, limits, y_values, steps, tol, seed)
    logger.info("refinement: n_t %d -> %d, n_x %d -> %d", grid.n_t, fine.n_t, grid.n_x, fine.n_x)
    refined = grid_verdicts(
        dc.with_params(grid=fine),
        dd.with_params(grid=fine),
        [d.with_params(grid=fine) for d in binomials],
        limits,
        y_values,
        steps,
        tol,
        seed,
    )
    return RefinementReport(grid, fine, coarse, refined)
