"""
Symbols and operators built from binomial shift operators.

For a coefficient v and a shift gamma (possibly inverted, epsilon = -1)
this module assembles the symbol of (I - mu v U_gamma) R_y, the truncated
Neumann-series symbol of (I - mu v U_gamma)^{-1} R_y, the symbol h of the
operator H combining the (c, alpha) and (d, beta) binomials, its fiber
factorization v l, and the regularizer symbols f and g_y.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import DomainError, EllipticityError, InvalidInputError, PreconditionError
from .grid import GridSpec
from .operators import (
    DenseOperator,
    conv_apply,
    conv_operator,
    op_compose,
    pdo_operator,
)
from .shifts import SOFunction, SOShift, neumann_matrix, shift_flags, shift_sparse
from .symbols import (
    BivariateSymbol,
    FiberPoint,
    FiberRow,
    _check_y,
    bivariate_from_function,
    cached_rows,
    fiber_points,
    make_p_y,
    p_y_values,
    r_y_values,
)

logger = logging.getLogger(__name__)

ELLIPTICITY_FLOOR = 0.1
BLEND_CENTER = 10.0
DENSE_FACTOR = 4
FIBER_SAMPLES = 8


@dataclass(frozen=True)
class BinomialData:
    """Coefficient, shift and parameters of one binomial I - mu v U_gamma^epsilon."""

    v: SOFunction
    gamma: SOShift
    grid: GridSpec
    y: float = 2.0
    mu: float = 1.0
    epsilon: int = 1

    def __post_init__(self) -> None:
        _check_y(self.y)
        if not 0.0 <= self.mu <= 1.0:
            raise DomainError(f"mu must lie in [0, 1], got {self.mu}")
        if self.epsilon not in (1, -1):
            raise InvalidInputError(f"Unknown direction: {self.epsilon}. Available: [1, -1]")

    def with_params(self, **changes) -> "BinomialData":
        return replace(self, **changes)

    @property
    def label(self) -> str:
        star = "" if self.epsilon == 1 else "^-1"
        return f"{self.v.name},{self.gamma.name}{star}"

    def displacement(self, u: np.ndarray) -> np.ndarray:
        return self.gamma.displacement(u, self.epsilon)

    def jacobian(self, u: np.ndarray) -> np.ndarray:
        return self.gamma.jacobian(u, self.epsilon)

    def step(self, u: np.ndarray) -> np.ndarray:
        return u + self.displacement(u)

    def factor(self, u: np.ndarray) -> np.ndarray:
        """mu v Psi^{1/p}, the per-term factor of the series."""
        return self.mu * self.v.of_u(u) * self.jacobian(u) ** (1.0 / self.grid.p)

    def symbol_contraction(self) -> float:
        """
        sup |mu v Psi^{1/p}| on a refined sampling of the log grid.

        This is the ratio of successive terms of the series symbol. The dense
        Neumann operator is governed by the l2 factor of
        ``shifts.contraction_factor`` instead, which carries an extra
        Psi^{-1/2} from the change of variables on the weighted samples.
        """
        if self.mu == 0.0:
            return 0.0
        grid = self.grid
        u = np.linspace(grid.u_min, grid.u_max, DENSE_FACTOR * grid.n_t)
        return float(np.max(np.abs(self.factor(u))))

    def fiber_data(self, point: FiberPoint) -> Tuple[float, float]:
        """(v(xi), psi(xi)) on the fiber over the point's endpoint."""
        return self.v.fiber_value(point), self.gamma.fiber_displacement(point, self.epsilon)

    def fiber_factor(self, point: FiberPoint, x: np.ndarray) -> np.ndarray:
        """1 - mu v(xi) exp(i psi(xi) x)."""
        v_xi, psi_xi = self.fiber_data(point)
        return 1.0 - self.mu * v_xi * np.exp(1j * psi_xi * np.asarray(x, dtype=float))


def _require_contraction(d: BinomialData, what: str) -> float:
    q = d.symbol_contraction()
    if q >= 1.0:
        raise PreconditionError(f"{what} ({d.label}): contraction factor {q:.4g} is not below 1")
    return q


def _r_row(y: float, x: np.ndarray) -> np.ndarray:
    return r_y_values(y, x)[None, :]


def _fiber_set(*data: BinomialData) -> List[FiberPoint]:
    """One fiber sample per endpoint, or eight phase-shifted ones when a fixture oscillates."""
    oscillating = any(not (d.v.converges and d.gamma.omega.converges) for d in data)
    return fiber_points(data[0].grid, count=FIBER_SAMPLES if oscillating else 1)


# -- single-shift symbols ------------------------------------------------------------


def symbol_shift_R(d: BinomialData) -> BivariateSymbol:
    """Symbol Psi^{1/p} e^{i psi x} r_y of U_gamma R_y (mu and v ignored)."""
    grid, y = d.grid, d.y
    u = grid.u
    weight = (d.jacobian(u) ** (1.0 / grid.p))[:, None]
    psi = d.displacement(u)[:, None]
    func = lambda x: weight * np.exp(1j * psi * x[None, :]) * _r_row(y, x)  # noqa: E731
    fibers = []
    for pt in _fiber_set(d):
        _, psi_xi = d.fiber_data(pt)
        fibers.append(FiberRow(pt.label, pt.t, np.exp(1j * psi_xi * grid.x) * r_y_values(y, grid.x), pt.index))
    return bivariate_from_function(grid, func, 0.0, 0.0, fibers, f"d[{d.gamma.name}]")


def symbol_binomial_R(d: BinomialData) -> BivariateSymbol:
    """
    Symbol of (I - mu v U_gamma) R_y.

    a(t, x) = (1 - mu v(t) Psi(t)^{1/p} e^{i psi(t) x}) r_y(x), vanishing at
    x = +-inf; its fiber rows are (1 - mu v(xi) e^{i psi(xi) x}) r_y(x).
    """
    grid, y = d.grid, d.y
    u = grid.u
    coeff = d.factor(u)[:, None]
    psi = d.displacement(u)[:, None]
    func = lambda x: (1.0 - coeff * np.exp(1j * psi * x[None, :])) * _r_row(y, x)  # noqa: E731
    fibers = [
        FiberRow(pt.label, pt.t, d.fiber_factor(pt, grid.x) * r_y_values(y, grid.x), pt.index)
        for pt in _fiber_set(d)
    ]
    return bivariate_from_function(grid, func, 0.0, 0.0, fibers, f"a[{d.label}]")


@dataclass
class SeriesReport:
    """Truncation data of the Neumann-series symbol."""

    n_terms: int
    q: float
    tail_bound: float
    root_test: List[float]
    extension_change: float
    dropped_terms: int
    flags: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]

    @property
    def honest(self) -> bool:
        """Reported tail bound covers the change from five extra terms."""
        return self.tail_bound >= self.extension_change


def _orbit(d: BinomialData, n_terms: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Coefficients a_n(t) = prod_{k<n} mu v Psi^{1/p} at gamma_k(t) and displacements psi_n.

    Terms whose orbit point leaves the log grid are zeroed; the mask of
    surviving terms is returned alongside.
    """
    grid = d.grid
    u0 = grid.u
    lo, hi = u0[0], u0[-1]
    coeffs = np.zeros((n_terms + 1, grid.n_t), dtype=complex)
    psis = np.zeros((n_terms + 1, grid.n_t))
    alive = np.zeros((n_terms + 1, grid.n_t), dtype=bool)
    coeffs[0] = 1.0
    alive[0] = True
    u = u0.copy()
    a = np.ones(grid.n_t, dtype=complex)
    inside = np.ones(grid.n_t, dtype=bool)
    for n in range(1, n_terms + 1):
        a = a * d.factor(u)
        u = d.step(u)
        inside &= (u >= lo) & (u <= hi)
        coeffs[n] = np.where(inside, a, 0.0)
        psis[n] = u - u0
        alive[n] = inside
    return coeffs, psis, alive


def _series_terms(q: float, scale: float, tol: float) -> int:
    if q == 0.0:
        return 0
    n = 0
    while q ** (n + 1) / (1.0 - q) * scale > tol:
        n += 1
    return n


def symbol_binomial_inverse_R(
    d: BinomialData, tol: float = 1e-10
) -> Tuple[BivariateSymbol, SeriesReport]:
    """
    Truncated Neumann-series symbol c of (I - mu v U_gamma)^{-1} R_y.

    c(t, x) = r_y(x) [1 + sum_{n=1}^N a_n(t) e^{i psi_n(t) x}], with N the
    smallest count whose geometric tail bound q^{N+1}/(1-q) sup|r_y| falls
    below tol. Fiber rows are the closed form (1 - mu v(xi) e^{i psi(xi) x})^{-1} r_y(x).

    Raises:
        PreconditionError: If the measured contraction factor is not below 1
    """
    q = _require_contraction(d, "symbol_binomial_inverse_R")
    grid, y = d.grid, d.y
    sup_r = 1.0 / np.sin(np.pi / y)
    n_terms = _series_terms(q, sup_r, tol)
    coeffs, psis, alive = _orbit(d, n_terms + 5)

    def rows(x: np.ndarray, upto: int = n_terms, start: int = 0) -> np.ndarray:
        acc = np.zeros((grid.n_t, len(x)), dtype=complex)
        for n in range(start, upto + 1):
            acc += coeffs[n][:, None] * np.exp(1j * psis[n][:, None] * x[None, :])
        return acc * _r_row(y, x)

    func = lambda x: rows(np.asarray(x, dtype=float))  # noqa: E731
    extra = np.abs(rows(grid.x, n_terms + 5, n_terms + 1))
    norms = np.max(np.abs(coeffs[1:]), axis=1)
    root_test = [float(a ** (1.0 / n)) for n, a in enumerate(norms, start=1)]
    flags = ~alive[n_terms] if n_terms > 0 else np.zeros(grid.n_t, dtype=bool)
    fibers = [
        FiberRow(pt.label, pt.t, r_y_values(y, grid.x) / d.fiber_factor(pt, grid.x), pt.index)
        for pt in _fiber_set(d)
    ]
    symbol = bivariate_from_function(grid, func, 0.0, 0.0, fibers, f"c[{d.label}]", flags)
    report = SeriesReport(
        n_terms=n_terms,
        q=q,
        tail_bound=q ** (n_terms + 1) / (1.0 - q) * sup_r if q > 0 else 0.0,
        root_test=root_test,
        extension_change=float(np.max(extra)) if extra.size else 0.0,
        dropped_terms=int(np.sum(~alive[1 : n_terms + 1])),
        flags=flags,
    )
    logger.debug("series symbol %s: q=%.4g, N=%d", symbol.name, q, n_terms)
    return symbol, report


def fiber_series_partial_sum(d: BinomialData, point: FiberPoint, n_terms: int) -> np.ndarray:
    """sum_{n<=N} (mu v(xi) e^{i psi(xi) x})^n r_y(x) on the x-grid."""
    x = d.grid.x
    z = 1.0 - d.fiber_factor(point, x)
    total = np.zeros_like(z)
    power = np.ones_like(z)
    for _ in range(n_terms + 1):
        total += power
        power = power * z
    return total * r_y_values(d.y, x)


# -- the symbol h and its fiber factorization ----------------------------------------


def _same_setting(dc: BinomialData, dd: BinomialData) -> None:
    if dc.grid != dd.grid:
        raise InvalidInputError("binomial data live on different grids")
    if dc.mu != dd.mu or dc.y != dd.y:
        raise InvalidInputError(
            f"binomial data disagree on parameters (mu {dc.mu}/{dd.mu}, y {dc.y}/{dd.y})"
        )


def fiber_vl(
    dc: BinomialData, dd: BinomialData, point: FiberPoint, x: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Fiber functions v and l of H on the fiber over ``point``.

    v = (1 - mu c e^{i omega x}) p_y^+ + (1 - mu d e^{i eta x}) p_y^-
    l = (1 - mu c e^{i omega x})^{-1} p_y^+ + (1 - mu d e^{i eta x})^{-1} p_y^-

    Raises:
        DomainError: If |mu c(xi)| or |mu d(xi)| is not below 1
    """
    _same_setting(dc, dd)
    for d in (dc, dd):
        value = abs(d.mu * d.fiber_data(point)[0])
        if value >= 1.0:
            raise DomainError(f"fiber coefficient |mu v| = {value:.4g} of {d.label} is not below 1")
    x = np.asarray(x, dtype=float)
    a = dc.fiber_factor(point, x)
    b = dd.fiber_factor(point, x)
    plus, minus = p_y_values(dc.y, 1, x), p_y_values(dc.y, -1, x)
    return a * plus + b * minus, plus / a + minus / b


def h_fiber_rows(dc: BinomialData, dd: BinomialData) -> List[FiberRow]:
    """Fiber rows v l of h on the x-grid, without sampling the interior of the symbol."""
    _same_setting(dc, dd)
    rows = []
    for pt in _fiber_set(dc, dd):
        v_row, l_row = fiber_vl(dc, dd, pt, dc.grid.x)
        rows.append(FiberRow(pt.label, pt.t, v_row * l_row, pt.index))
    return rows


def fiber_factorization_defect(
    dc: BinomialData, dd: BinomialData, cc: BivariateSymbol, cd: BivariateSymbol
) -> float:
    """
    max |h - v l| over the shared fiber rows.

    h is assembled from the fiber rows of a^c, a^d and of the series symbols
    cc, cd of the two binomials, so the closed form v l checks the series.
    """
    _same_setting(dc, dd)
    x = dc.grid.x
    r = r_y_values(dc.y, x)
    ac, ad = _rows_by_key(symbol_binomial_R(dc)), _rows_by_key(symbol_binomial_R(dd))
    rc, rd = _rows_by_key(cc), _rows_by_key(cd)
    worst = 0.0
    for key in sorted(set(ac) & set(ad) & set(rc) & set(rd)):
        row = ac[key]
        h_row = 1.0 + 0.25 * (2.0 * r * r - ad[key].values * rc[key].values - row.values * rd[key].values)
        v_row, l_row = fiber_vl(dc, dd, FiberPoint(row.label, row.t, row.index), x)
        worst = max(worst, float(np.max(np.abs(h_row - v_row * l_row))))
    return worst


def _rows_by_key(symbol: BivariateSymbol) -> Dict[Tuple[str, int], FiberRow]:
    return {(row.label, row.index): row for row in symbol.fibers}


def coefficient_peak(dc: BinomialData, dd: BinomialData) -> Tuple[float, str]:
    """
    Largest |mu v| of the two coefficients over the fiber samples.

    Returns:
        (modulus, location) such as (1.2, 'c at infinity')
    """
    peak, where = 0.0, ""
    for d in (dc, dd):
        for pt in _fiber_set(dc, dd):
            value = abs(d.mu * d.v.fiber_value(pt))
            if value > peak:
                peak, where = value, f"{d.v.name} at {pt.label}"
    return peak, where


def symbol_h(dc: BinomialData, dd: BinomialData, tol: float = 1e-10) -> BivariateSymbol:
    """
    h = 1 + (1/4) [2 r_y^2 - a^d c^c - a^c c^d].

    Boundary rows are 1 and fiber rows are v l. Row evaluations are
    remembered for the x-grid and the FFT frequencies.
    """
    _same_setting(dc, dd)
    grid, y = dc.grid, dc.y
    ac, ad = symbol_binomial_R(dc), symbol_binomial_R(dd)
    cc, _ = symbol_binomial_inverse_R(dc, tol)
    cd, _ = symbol_binomial_inverse_R(dd, tol)

    def func(x: np.ndarray) -> np.ndarray:
        r = _r_row(y, x)
        return 1.0 + 0.25 * (2.0 * r**2 - ad.func(x) * cc.func(x) - ac.func(x) * cd.func(x))

    fibers = h_fiber_rows(dc, dd)
    flags = cc.flags | cd.flags
    return bivariate_from_function(
        grid, cached_rows(func), 1.0, 1.0, fibers, f"h[mu={dc.mu:g},y={y:g}]", flags
    )


def binomial_apply(d: BinomialData, m: np.ndarray) -> np.ndarray:
    """(I - mu v U_gamma^epsilon) m for a vector or the columns of a matrix."""
    grid = d.grid
    m = np.asarray(m, dtype=complex)
    if d.mu == 0.0:
        return m.copy()
    coeff = d.mu * d.v.of_u(grid.u)
    shifted = shift_sparse(d.gamma, grid, d.epsilon) @ m
    return m - (coeff[:, None] * shifted if m.ndim == 2 else coeff * shifted)


def binomial_operator(d: BinomialData) -> DenseOperator:
    """I - mu v U_gamma^epsilon."""
    grid = d.grid
    flags = shift_flags(d.gamma, grid, d.epsilon)
    matrix = binomial_apply(d, np.eye(grid.n_t, dtype=complex))
    return DenseOperator(matrix, grid, f"I-{d.mu:g}{d.v.name}U_{d.gamma.name}", flags)


def _projections(grid: GridSpec, y: float) -> Tuple[DenseOperator, DenseOperator]:
    return conv_operator(make_p_y(y, "+", grid)), conv_operator(make_p_y(y, "-", grid))


def _build_V(dc: BinomialData, dd: BinomialData) -> DenseOperator:
    plus, minus = _projections(dc.grid, dc.y)
    matrix = binomial_apply(dc, plus.matrix) + binomial_apply(dd, minus.matrix)
    return DenseOperator(matrix, dc.grid, "V")


def build_L(dc: BinomialData, dd: BinomialData, tol: float = 1e-10) -> DenseOperator:
    """
    L = (I - mu c U_alpha)^{-1} P_y^+ + (I - mu d U_beta)^{-1} P_y^-.

    Each inverse is summed directly onto the columns of its projection.

    Raises:
        PreconditionError: If a measured contraction factor is not below 1
    """
    _same_setting(dc, dd)
    grid, y = dc.grid, dc.y
    plus, minus = _projections(grid, y)
    total = np.zeros((grid.n_t, grid.n_t), dtype=complex)
    flags = np.zeros(grid.n_t, dtype=bool)
    for d, proj in ((dc, plus), (dd, minus)):
        if d.mu == 0.0:
            total += proj.matrix
            continue
        _require_contraction(d, "build_L")
        total += neumann_matrix(d.v, d.gamma, grid, proj.matrix, tol, d.mu, d.epsilon)
        flags |= shift_flags(d.gamma, grid, d.epsilon)
    return DenseOperator(total, grid, f"L[mu={dc.mu:g},y={y:g}]", flags)


def apply_V(dc: BinomialData, dd: BinomialData, columns: np.ndarray) -> np.ndarray:
    """V applied to weighted samples stored column-wise."""
    _same_setting(dc, dd)
    grid, y = dc.grid, dc.y
    plus = conv_apply(make_p_y(y, "+", grid), columns)
    minus = conv_apply(make_p_y(y, "-", grid), columns)
    return binomial_apply(dc, plus) + binomial_apply(dd, minus)


def apply_L(dc: BinomialData, dd: BinomialData, columns: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """
    L applied to weighted samples stored column-wise.

    Raises:
        PreconditionError: If a measured contraction factor is not below 1
    """
    _same_setting(dc, dd)
    grid, y = dc.grid, dc.y
    out = np.zeros_like(np.asarray(columns, dtype=complex))
    for d, sign in ((dc, "+"), (dd, "-")):
        part = conv_apply(make_p_y(y, sign, grid), columns)
        if d.mu == 0.0:
            out += part
            continue
        _require_contraction(d, "apply_L")
        out += neumann_matrix(d.v, d.gamma, grid, part, tol, d.mu, d.epsilon)
    return out


def build_V_L_H(
    dc: BinomialData,
    dd: BinomialData,
    tol: float = 1e-10,
    h: Optional[BivariateSymbol] = None,
) -> Tuple[DenseOperator, DenseOperator, DenseOperator]:
    """
    Assemble V, L and H for the pair of binomials.

    V = (I - mu c U_alpha) P_y^+ + (I - mu d U_beta) P_y^-
    L = (I - mu c U_alpha)^{-1} P_y^+ + (I - mu d U_beta)^{-1} P_y^-
    H = Op(h)

    Args:
        dc: The (c, alpha) binomial
        dd: The (d, beta) binomial
        tol: Neumann-series tolerance
        h: symbol_h(dc, dd, tol) when the caller already holds it
    """
    _same_setting(dc, dd)
    y = dc.y
    v_op = _build_V(dc, dd)
    l_op = build_L(dc, dd, tol)
    h_op = pdo_operator(symbol_h(dc, dd, tol) if h is None else h)
    return (
        replace(v_op, provenance=f"V[mu={dc.mu:g},y={y:g}]"),
        l_op,
        replace(h_op, provenance=f"H[mu={dc.mu:g},y={y:g}]"),
    )


def build_W(dc: BinomialData, dd: BinomialData) -> DenseOperator:
    """W = (I - c U_alpha^e1) P_2^+ + (I - d U_beta^e2) P_2^-, i.e. V at mu = 1, y = 2."""
    dc2, dd2 = dc.with_params(mu=1.0, y=2.0), dd.with_params(mu=1.0, y=2.0)
    _same_setting(dc2, dd2)
    return replace(_build_V(dc2, dd2), provenance="W")


# -- regularizer ------------------------------------------------------------------


def _x_blend(x: np.ndarray) -> np.ndarray:
    """1 on the working band, decaying smoothly to 0 in the far x-tails."""
    return 0.5 * (1.0 - np.tanh(np.abs(x) - BLEND_CENTER))


def _fiber_wl(dc: BinomialData, dd: BinomialData, point: FiberPoint, x: np.ndarray) -> np.ndarray:
    w_row, l_row = fiber_vl(dc.with_params(y=2.0), dd.with_params(y=2.0), point, x)
    return w_row * l_row


def regularizer_symbol_f(
    dc: BinomialData,
    dd: BinomialData,
    tol: float = 1e-10,
    floor: float = ELLIPTICITY_FLOOR,
    h: Optional[BivariateSymbol] = None,
) -> BivariateSymbol:
    """
    Symbol f of the regularizer of W (taken at y = 2).

    Interior rows are blend(x)/h + 1 - blend(x) with h the symbol of H at
    y = 2, boundary rows are 1 and fiber rows 1/(w l). A caller holding h
    for the same data at y = 2 passes it in.

    Raises:
        EllipticityError: If min |h| on the grid or |w l| on a fiber drops below floor
    """
    dc2, dd2 = dc.with_params(y=2.0), dd.with_params(y=2.0)
    grid = dc2.grid
    h = symbol_h(dc2, dd2, tol) if h is None else h
    low = float(min(np.min(np.abs(h.values)), np.min(np.abs(h.sample(grid.xi)))))
    if low < floor:
        raise EllipticityError(f"symbol h is not elliptic on the grid: min |h| = {low:.4g}")
    fibers = []
    for pt in _fiber_set(dc2, dd2):
        wl = _fiber_wl(dc2, dd2, pt, grid.x)
        if np.min(np.abs(wl)) < floor:
            raise EllipticityError(
                f"fiber over {pt.label} is not elliptic: min |w l| = {np.min(np.abs(wl)):.4g}"
            )
        fibers.append(FiberRow(pt.label, pt.t, 1.0 / wl, pt.index))
    h_func = h.sample

    def func(x: np.ndarray) -> np.ndarray:
        blend = _x_blend(x)[None, :]
        return blend / h_func(x) + (1.0 - blend)

    return bivariate_from_function(grid, func, 1.0, 1.0, fibers, "f", h.flags)


def regularizer_W(
    dc: BinomialData,
    dd: BinomialData,
    tol: float = 1e-10,
    f: Optional[BivariateSymbol] = None,
) -> DenseOperator:
    """W^{(-1)} = Op(f) L at mu = 1, y = 2."""
    dc2, dd2 = dc.with_params(mu=1.0, y=2.0), dd.with_params(mu=1.0, y=2.0)
    f_op = pdo_operator(regularizer_symbol_f(dc2, dd2, tol) if f is None else f)
    l_op = build_L(dc2, dd2, tol)
    return replace(op_compose(f_op, l_op), provenance="W^(-1)")


def symbol_g_y(
    dc: BinomialData,
    dd: BinomialData,
    tol: float = 1e-10,
    f: Optional[BivariateSymbol] = None,
) -> BivariateSymbol:
    """
    g_y = f (c^{c,alpha} p_2^+ + c^{d,beta} p_2^-), the series symbols taken at mu = 1 and y.

    Boundary rows are 0 and fiber rows r_y / w. The symbol f does not depend
    on y, so a caller sweeping y passes it in once.
    """
    _same_setting(dc, dd)
    y = dc.y
    dc1, dd1 = dc.with_params(mu=1.0), dd.with_params(mu=1.0)
    grid = dc.grid
    f = regularizer_symbol_f(dc1, dd1, tol) if f is None else f
    cc, _ = symbol_binomial_inverse_R(dc1, tol)
    cd, _ = symbol_binomial_inverse_R(dd1, tol)

    def func(x: np.ndarray) -> np.ndarray:
        plus = p_y_values(2.0, 1, x)[None, :]
        minus = p_y_values(2.0, -1, x)[None, :]
        return f.sample(x) * (cc.func(x) * plus + cd.func(x) * minus)

    fibers = []
    for pt in _fiber_set(dc, dd):
        w_row, _ = fiber_vl(dc1.with_params(y=2.0), dd1.with_params(y=2.0), pt, grid.x)
        fibers.append(FiberRow(pt.label, pt.t, r_y_values(y, grid.x) / w_row, pt.index))
    return bivariate_from_function(grid, func, 0.0, 0.0, fibers, f"g[y={y:g}]", cc.flags | cd.flags)
