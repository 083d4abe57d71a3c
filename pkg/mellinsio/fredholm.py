"""
Fredholm diagnostics: disk containment, ellipticity, winding numbers,
kernel-dimension estimates and the homotopy scan over mu.

The index is read off the winding number of the boundary loop of a symbol;
kernel_dims is only a consistency indicator since square matrices cannot
carry a nonzero index.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .constructions import (
    BinomialData,
    build_V_L_H,
    regularizer_symbol_f,
    symbol_h,
)
from .errors import DegenerateLoopError, DomainError, MellinSIOError, ScanError
from .operators import (
    DenseOperator,
    chain_residual,
    compactness_proxy,
    interior_probes,
    multiplication,
    op_compose,
    op_norm_estimate,
    pdo_operator,
    singular_values,
)
from .shifts import shift_operator
from .symbols import BivariateSymbol, p_y_values

logger = logging.getLogger(__name__)

DISK_SLACK = 1e-12
ELLIPTIC_THRESHOLD = 1e-3
EPS_WIND = 1e-3
RESIDUE_TOL = 0.1


# -- disk containment ---------------------------------------------------------------


@dataclass
class DiskReport:
    """Containment of a curve in the disk D(center, radius)."""

    center: complex
    radius: float
    max_distance: float
    min_modulus: float
    passed: bool


def _segments(v: complex, w: complex, psi: float, zeta: float, x: np.ndarray):
    x = np.asarray(x, dtype=float)
    return (
        1.0 - v * np.exp(1j * psi * x),
        1.0 - w * np.exp(1j * zeta * x),
        p_y_values(2.0, 1, x),
        p_y_values(2.0, -1, x),
    )


def disk_check_f(v: complex, w: complex, psi: float, zeta: float, x: np.ndarray) -> DiskReport:
    """
    f(x) = (1 - v e^{i psi x}) p_2^+(x) + (1 - w e^{i zeta x}) p_2^-(x) stays in D(1, max(|v|, |w|)).
    """
    a, b, plus, minus = _segments(v, w, psi, zeta, x)
    f = a * plus + b * minus
    radius = max(abs(v), abs(w))
    dist = float(np.max(np.abs(f - 1.0)))
    return DiskReport(1.0, radius, dist, float(np.min(np.abs(f))), dist <= radius + DISK_SLACK)


def disk_check_g(v: complex, w: complex, psi: float, zeta: float, x: np.ndarray) -> DiskReport:
    """
    g(x) = (1 - v e^{i psi x})^{-1} p_2^+ + (1 - w e^{i zeta x})^{-1} p_2^- stays in
    D((1 - r^2)^{-1}, (1 - r^2)^{-1} r) with r = max(|v|, |w|).

    Raises:
        DomainError: If |v| or |w| is not below 1
    """
    if abs(v) >= 1.0 or abs(w) >= 1.0:
        raise DomainError(f"disk_check_g needs |v|, |w| < 1, got {abs(v):.4g}, {abs(w):.4g}")
    a, b, plus, minus = _segments(v, w, psi, zeta, x)
    g = plus / a + minus / b
    r = max(abs(v), abs(w))
    center = 1.0 / (1.0 - r * r)
    radius = center * r
    dist = float(np.max(np.abs(g - center)))
    return DiskReport(center, radius, dist, float(np.min(np.abs(g))), dist <= radius + DISK_SLACK)


# -- ellipticity and winding -----------------------------------------------------------


@dataclass
class EllipticityReport:
    """Minimum modulus of a symbol over its boundary columns and fiber rows."""

    symbol: str
    min_boundary: float
    min_fiber: float
    min_interior: float
    threshold: float

    @property
    def min_modulus(self) -> float:
        return min(self.min_boundary, self.min_fiber)

    @property
    def passed(self) -> bool:
        return self.min_modulus > self.threshold


def ellipticity_check(a: BivariateSymbol, threshold: float = ELLIPTIC_THRESHOLD) -> EllipticityReport:
    boundary = float(min(np.min(np.abs(a.boundary_minus)), np.min(np.abs(a.boundary_plus))))
    fiber = float(min((np.min(np.abs(row.values)) for row in a.fibers), default=np.inf))
    return EllipticityReport(a.name, boundary, fiber, float(np.min(np.abs(a.values))), threshold)


@dataclass(frozen=True, eq=False)
class BoundaryLoop:
    """Closed curve of complex samples traced by a symbol around its boundary."""

    points: np.ndarray
    label: str = "loop"

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", np.asarray(self.points, dtype=complex))

    @property
    def closing_gap(self) -> float:
        return float(abs(self.points[-1] - self.points[0]))

    @property
    def min_modulus(self) -> float:
        return float(np.min(np.abs(self.points)))


def build_loop(a: BivariateSymbol, index: int = 0) -> BoundaryLoop:
    """
    Trace a symbol around (fibers x R) u (R+ x {+-inf}).

    Order: fiber over 0 for x from -X to X, the column at x = +inf for t
    increasing, the fiber over infinity for x from X to -X, then the column
    at x = -inf back toward t = 0.
    """
    zero = a.fiber("zero", index).values
    inf = a.fiber("infinity", index).values
    return loop_from_rows(zero, inf, a.boundary_plus, a.boundary_minus, f"{a.name}#{index}")


def loop_from_rows(
    zero: np.ndarray, infinity: np.ndarray, plus: np.ndarray, minus: np.ndarray, label: str = "loop"
) -> BoundaryLoop:
    """The loop of build_loop from the two fiber rows and the two boundary columns alone."""
    points = np.concatenate([zero, plus, np.asarray(infinity)[::-1], np.asarray(minus)[::-1]])
    return BoundaryLoop(points, label)


@dataclass
class WindingReport:
    winding: int
    residue: float
    max_step: float
    min_modulus: float


def winding_report(loop: BoundaryLoop, eps_wind: float = EPS_WIND) -> WindingReport:
    """
    Accumulated argument of a closed loop.

    Raises:
        DegenerateLoopError: If the loop passes within eps_wind of the origin
    """
    z = loop.points
    if loop.min_modulus < eps_wind:
        raise DegenerateLoopError(
            f"loop '{loop.label}' passes within {loop.min_modulus:.2e} of the origin"
        )
    closed = np.append(z, z[0])
    steps = np.angle(closed[1:] / closed[:-1])
    turns = float(np.sum(steps) / (2.0 * np.pi))
    winding = int(np.rint(turns))
    return WindingReport(winding, abs(turns - winding), float(np.max(np.abs(steps))), loop.min_modulus)


def winding_number(loop: BoundaryLoop, eps_wind: float = EPS_WIND) -> int:
    """
    Winding number of the loop about the origin.

    Raises:
        DegenerateLoopError: If the loop passes near the origin or the
            rounding residue is not below 0.1
    """
    report = winding_report(loop, eps_wind)
    if report.residue >= RESIDUE_TOL:
        raise DegenerateLoopError(f"loop '{loop.label}' winding residue {report.residue:.3f}")
    return report.winding


def kernel_dims(a: DenseOperator, eps: float, singular: Optional[np.ndarray] = None) -> Tuple[int, int]:
    """
    Numerical estimates of dim ker A and dim ker A*.

    Both count singular values below eps * sigma_max, so they always agree.
    Pass ``singular`` when the singular values of A are already known.
    """
    sv = singular_values(a) if singular is None else np.asarray(singular, dtype=float)
    if sv.size == 0 or sv[0] == 0:
        n = a.grid.n_t
        return n, n
    k = int(np.sum(sv < eps * sv[0]))
    return k, k


# -- homotopy scan ------------------------------------------------------------------------


@dataclass
class HomotopyRow:
    mu: float
    min_h: float
    elliptic: bool
    windings: List[int]
    residue: float
    residual: float
    op_norm: float
    norm_step: float = 0.0
    lipschitz_bound: float = 0.0
    vl_ratio: float = 0.0
    lv_ratio: float = 0.0
    max_edge: float = 0.0
    compact_like: bool = True

    @property
    def lipschitz_ok(self) -> bool:
        return self.norm_step <= self.lipschitz_bound + 1e-10


@dataclass
class HomotopyReport:
    rows: List[HomotopyRow]
    residual_tol: float
    kernel_dims_end: Tuple[int, int] = (0, 0)
    notes: List[str] = field(default_factory=list)

    @property
    def index_zero(self) -> bool:
        return all(w == 0 for row in self.rows for w in row.windings)

    @property
    def chain_compact(self) -> bool:
        return all(row.compact_like for row in self.rows)

    @property
    def verdict(self) -> str:
        return "INDEX ZERO" if self.index_zero else "INDEX NONZERO"


def _coefficient_shift_norm(d: BinomialData) -> float:
    grid = d.grid
    op = op_compose(multiplication(grid, d.v.of_u(grid.u)), shift_operator(d.gamma, grid, d.epsilon))
    return op_norm_estimate(op)


def homotopy_scan(
    dc: BinomialData,
    dd: BinomialData,
    steps: int = 11,
    probes: Optional[np.ndarray] = None,
    tol: float = 1e-10,
    residual_tol: float = 1e-2,
    seed: int = 0,
    compactness: bool = True,
    sv_tol: float = 1e-3,
    edge_tol: float = 1e-2,
    edge_frequency: float = 8.0,
) -> HomotopyReport:
    """
    Follow V_{mu,2} from mu = 0 to mu = 1.

    Each step records ellipticity of h_{mu,2}, the winding of its boundary
    loops, the interior residual of V (L Op(f)) - I and ||V_mu||. With ``compactness`` the
    proxies of V L - H and L V - H are recorded as well. Successive
    norms must move by at most dmu (||c U_alpha|| + ||d U_beta||).

    Raises:
        ScanError: If a step fails ellipticity or a loop is degenerate
    """
    if steps < 2:
        raise ScanError(f"homotopy scan needs at least 2 steps, got {steps}")
    grid = dc.grid
    probes = interior_probes(grid, seed=seed) if probes is None else probes
    lipschitz = _coefficient_shift_norm(dc.with_params(mu=1.0)) + _coefficient_shift_norm(
        dd.with_params(mu=1.0)
    )
    rows: List[HomotopyRow] = []
    last_v: Optional[DenseOperator] = None
    for mu in np.linspace(0.0, 1.0, steps):
        mu = float(mu)
        dcm, ddm = dc.with_params(mu=mu, y=2.0), dd.with_params(mu=mu, y=2.0)
        try:
            h = symbol_h(dcm, ddm, tol)
            ell = ellipticity_check(h)
            if not ell.passed:
                raise ScanError(f"mu={mu:.3f}: symbol h not elliptic (min |h| = {ell.min_modulus:.3g})")
            reports = [winding_report(build_loop(h, idx)) for idx in sorted({f.index for f in h.fibers})]
            v_op, l_op, h_op = build_V_L_H(dcm, ddm, tol, h=h)
            f_op = pdo_operator(regularizer_symbol_f(dcm, ddm, tol, h=h))
        except ScanError:
            raise
        except MellinSIOError as exc:
            raise ScanError(f"mu={mu:.3f}: {exc}") from exc
        residual = chain_residual([v_op, l_op, f_op], probes)
        norm = op_norm_estimate(v_op, seed=seed)
        row = HomotopyRow(
            mu=mu,
            min_h=ell.min_modulus,
            elliptic=ell.passed,
            windings=[r.winding for r in reports],
            residue=max(r.residue for r in reports),
            residual=residual,
            op_norm=norm,
        )
        if compactness:
            scale = norm * op_norm_estimate(l_op, seed=seed)
            vl = compactness_proxy(op_compose(v_op, l_op) - h_op, sv_tol, edge_tol, edge_frequency, scale)
            lv = compactness_proxy(op_compose(l_op, v_op) - h_op, sv_tol, edge_tol, edge_frequency, scale)
            row.vl_ratio, row.lv_ratio = vl.decisive_ratio, lv.decisive_ratio
            row.max_edge = max(vl.max_edge_response, lv.max_edge_response)
            row.compact_like = vl.compact_like and lv.compact_like
        if rows:
            row.norm_step = abs(norm - rows[-1].op_norm)
            row.lipschitz_bound = (mu - rows[-1].mu) * lipschitz
        rows.append(row)
        last_v = v_op
        logger.info("homotopy mu=%.2f: min|h|=%.3g, winding=%s, residual=%.2e", mu, ell.min_modulus, row.windings, residual)
    report = HomotopyReport(rows=rows, residual_tol=residual_tol)
    if last_v is not None:
        report.kernel_dims_end = kernel_dims(last_v, 1e-6)
    report.notes.append("index read from boundary-loop winding; kernel_dims is a consistency indicator")
    return report
