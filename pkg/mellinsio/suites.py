"""
Verification suites.

Each suite is a registry of named checks. A check measures one quantity
(the worst case over every fixture, y value or parameter it sweeps),
compares it against a threshold from the run configuration and yields one
CheckRecord. Library errors raised inside a check are recorded as FAIL
rather than aborting the run.
"""

from __future__ import annotations

import itertools
import logging
import time
import zlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from .config import RunConfig
from .constructions import (
    BinomialData,
    SeriesReport,
    binomial_operator,
    build_V_L_H,
    build_W,
    coefficient_peak,
    fiber_factorization_defect,
    fiber_series_partial_sum,
    regularizer_W,
    regularizer_symbol_f,
    symbol_binomial_inverse_R,
    symbol_binomial_R,
    symbol_g_y,
    symbol_h,
    symbol_shift_R,
)
from .errors import ConfigurationError, DomainError, MellinSIOError, PreconditionError
from .fredholm import (
    BoundaryLoop,
    HomotopyReport,
    build_loop,
    disk_check_f,
    disk_check_g,
    ellipticity_check,
    homotopy_scan,
    kernel_dims,
    winding_number,
)
from .grid import (
    GridFunction,
    GridSpec,
    from_weighted,
    lp_norm,
    mellin_forward,
    mellin_inverse,
    weighted_samples,
)
from .loader import SymbolCache
from .operators import (
    DenseOperator,
    cauchy_kernel,
    cauchy_sio_direct,
    compactness_proxy,
    conv_operator,
    identity,
    interior_probes,
    multiplication,
    op_norm_estimate,
    pdo_operator,
    relative_defect,
    singular_values,
)
from .refinement import grid_stability
from .shifts import (
    drift_along_shift,
    neumann_apply,
    shift_apply,
    shift_inverse,
    shift_iterate,
    shift_operator,
)
from .symbols import (
    BivariateSymbol,
    check_E_tilde,
    combine_multipliers,
    constant_multiplier,
    fiber_points,
    from_multiplier,
    from_t_function,
    make_p_y,
    make_r_y,
    make_s_y,
    r_y_values,
    s_y_values,
    symbol_algebra,
)

logger = logging.getLogger(__name__)

DISK_SAMPLES = 100
TELESCOPING_STEPS = 8


@dataclass
class Measurement:
    """Outcome of one check before it is timed and named."""

    value: Optional[float]
    threshold: Optional[float]
    passed: bool
    detail: str = ""


@dataclass
class CheckRecord:
    """One line of a suite report."""

    name: str
    value: Optional[float]
    threshold: Optional[float]
    passed: bool
    detail: str = ""
    wall_time: float = 0.0

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_dict(self) -> Dict[str, Any]:
        # wall time lives in the timing table so reports stay reproducible
        return {
            "name": self.name,
            "value": self.value,
            "threshold": self.threshold,
            "status": self.status,
            "detail": self.detail,
        }


@dataclass
class SuiteReport:
    """Checks of one suite run together with everything needed to reproduce it."""

    suite: str
    fixtures: List[str]
    grid: GridSpec
    seed: int
    checks: List[CheckRecord]
    plot_data: Dict[str, pd.DataFrame] = field(default_factory=dict, repr=False)
    operators: Dict[str, DenseOperator] = field(default_factory=dict, repr=False)
    notes: List[str] = field(default_factory=list)

    @property
    def grid_hash(self) -> str:
        return self.grid.grid_hash()

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    @property
    def failed(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "suite": self.suite,
            "verdict": self.verdict,
            "grid_hash": self.grid_hash,
            "grid": self.grid.model_dump(),
            "seed": self.seed,
            "fixtures": list(self.fixtures),
            "checks": [check.to_dict() for check in self.checks],
            "notes": list(self.notes),
        }

    def timing_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "check": [c.name for c in self.checks],
                "status": [c.status for c in self.checks],
                "wall_time_s": [c.wall_time for c in self.checks],
            }
        )


class SuiteContext:
    """Shared state of one suite run: config, probes, memoized constructions and outputs."""

    def __init__(self, config: RunConfig, cache: Optional[SymbolCache] = None):
        self.config = config
        self.grid = config.grid
        self.limits = config.thresholds
        self.cache = cache
        self.plot_data: Dict[str, pd.DataFrame] = {}
        self.operators: Dict[str, DenseOperator] = {}
        self.notes: List[str] = []
        self._series: Dict[Tuple[str, float, float, str], Tuple[BivariateSymbol, SeriesReport]] = {}
        self._scan: Optional[Union[HomotopyReport, MellinSIOError]] = None
        self._h: Dict[Tuple[str, str, float, float, str], BivariateSymbol] = {}
        self._f: Dict[Tuple[str, str], BivariateSymbol] = {}

    @cached_property
    def probes(self) -> np.ndarray:
        return interior_probes(self.grid, seed=self.config.seed)

    @property
    def y_values(self) -> List[float]:
        return list(self.config.y_values)

    @property
    def tol(self) -> float:
        return self.config.series_tol

    def rng(self, check: str) -> np.random.Generator:
        """Generator seeded by the run seed and the check name, independent of check order."""
        return np.random.default_rng([self.config.seed, zlib.crc32(check.encode("utf-8"))])

    def cached_values(self, params: Dict[str, Any], build: Callable[[], np.ndarray]) -> np.ndarray:
        if self.cache is None:
            return np.asarray(build(), dtype=complex)
        return self.cache.fetch({"grid": self.grid.grid_hash(), **params}, build)

    def pair(
        self,
        y: float = 2.0,
        mu: float = 1.0,
        epsilon1: Optional[int] = None,
        epsilon2: Optional[int] = None,
    ) -> Tuple[BinomialData, BinomialData]:
        """Binomial data of the (c, alpha) and (d, beta) factors."""
        cfg, pair = self.config, self.config.pair
        dc = BinomialData(
            cfg.fixture(pair.c),
            cfg.shift(pair.alpha),
            self.grid,
            y=y,
            mu=mu,
            epsilon=pair.epsilon1 if epsilon1 is None else epsilon1,
        )
        dd = BinomialData(
            cfg.fixture(pair.d),
            cfg.shift(pair.beta),
            self.grid,
            y=y,
            mu=mu,
            epsilon=pair.epsilon2 if epsilon2 is None else epsilon2,
        )
        return dc, dd

    def binomials(self, y: float = 2.0) -> List[BinomialData]:
        cfg = self.config
        return [
            BinomialData(cfg.fixture(b.v), cfg.shift(b.gamma), self.grid, y=y, epsilon=b.epsilon)
            for b in cfg.binomials
        ]

    def series(self, d: BinomialData) -> Tuple[BivariateSymbol, SeriesReport]:
        key = (d.label, d.y, d.mu, d.grid.grid_hash())
        if key not in self._series:
            self._series[key] = symbol_binomial_inverse_R(d, self.tol)
        return self._series[key]

    def h(self, dc: BinomialData, dd: BinomialData) -> BivariateSymbol:
        key = (dc.label, dd.label, dc.y, dc.mu, dc.grid.grid_hash())
        if key not in self._h:
            self._h[key] = symbol_h(dc, dd, self.tol)
        return self._h[key]

    def f(self, dc: BinomialData, dd: BinomialData) -> BivariateSymbol:
        """Regularizer symbol at mu = 1, y = 2, built from the shared h."""
        dc2, dd2 = dc.with_params(mu=1.0, y=2.0), dd.with_params(mu=1.0, y=2.0)
        key = (dc2.label, dd2.label)
        if key not in self._f:
            self._f[key] = regularizer_symbol_f(dc2, dd2, self.tol, h=self.h(dc2, dd2))
        return self._f[key]

    def homotopy(self) -> HomotopyReport:
        """The mu-scan shared by the index checks, run once per suite."""
        if self._scan is None:
            dc, dd = self.pair()
            try:
                self._scan = homotopy_scan(
                    dc,
                    dd,
                    steps=self.config.homotopy_steps,
                    probes=self.probes,
                    tol=self.tol,
                    residual_tol=self.limits.scan_residual,
                    seed=self.config.seed,
                    sv_tol=self.limits.sv_ratio,
                    edge_tol=self.limits.edge_response,
                    edge_frequency=self.config.edge_frequency,
                )
                self.plot_data["mu_scan"] = scan_frame(self._scan)
                self.notes.extend(self._scan.notes)
            except MellinSIOError as exc:
                self._scan = exc
        if isinstance(self._scan, MellinSIOError):
            raise self._scan
        return self._scan


CheckFn = Callable[[SuiteContext], Measurement]


# -- helpers -----------------------------------------------------------------------


def _at_most(value: float, threshold: float, detail: str = "") -> Measurement:
    value = float(value)
    return Measurement(value, float(threshold), bool(value <= threshold), detail)


def _severity(m: Measurement) -> float:
    if m.value is None or not np.isfinite(m.value):
        return np.inf
    if not m.threshold:
        return abs(m.value)
    return m.value / m.threshold


def _fmt(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.3g}"


def _combine(parts: List[Tuple[str, Measurement]]) -> Measurement:
    """Fold per-item measurements into one: PASS iff all pass, value from the worst item."""
    if not parts:
        return Measurement(None, None, True, "nothing to check")
    failing = [label for label, m in parts if not m.passed]
    pool = [(label, m) for label, m in parts if not m.passed] or parts
    label, worst = max(pool, key=lambda item: _severity(item[1]))
    entries = [f"{lbl}={_fmt(m.value)}" + (f" ({m.detail})" if m.detail else "") for lbl, m in parts]
    detail = f"worst {label}; " + "; ".join(entries)
    if failing:
        detail = f"failing: {', '.join(failing)}; " + detail
    return Measurement(worst.value, worst.threshold, not failing, detail)


def _sv_frame(sv: np.ndarray) -> pd.DataFrame:
    top = sv[0] if sv.size and sv[0] > 0 else 1.0
    return pd.DataFrame({"k": np.arange(1, sv.size + 1), "sigma": sv, "relative": sv / top})


def loop_frame(loop: BoundaryLoop) -> pd.DataFrame:
    """Loop samples with the first point repeated at the end."""
    points = np.append(loop.points, loop.points[:1])
    return pd.DataFrame({"k": np.arange(points.size), "re": points.real, "im": points.imag})


def scan_frame(scan: HomotopyReport) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "mu": [r.mu for r in scan.rows],
            "min_h": [r.min_h for r in scan.rows],
            "winding": [max(r.windings, key=abs) for r in scan.rows],
            "residue": [r.residue for r in scan.rows],
            "residual": [r.residual for r in scan.rows],
            "op_norm": [r.op_norm for r in scan.rows],
            "norm_step": [r.norm_step for r in scan.rows],
            "lipschitz_bound": [r.lipschitz_bound for r in scan.rows],
            "vl_ratio": [r.vl_ratio for r in scan.rows],
            "lv_ratio": [r.lv_ratio for r in scan.rows],
            "max_edge": [r.max_edge for r in scan.rows],
            "compact_like": [r.compact_like for r in scan.rows],
        }
    )


def _compactness(
    ctx: SuiteContext,
    op: DenseOperator,
    label: str,
    reference_norm: float = 1.0,
    singular: Optional[np.ndarray] = None,
) -> Tuple[str, Measurement]:
    limits = ctx.limits
    rep = compactness_proxy(
        op, limits.sv_ratio, limits.edge_response, ctx.config.edge_frequency, reference_norm, singular
    )
    detail = f"{rep.verdict}, edge {rep.max_edge_response:.1e}"
    return label, Measurement(rep.decisive_ratio, ctx.limits.sv_ratio, rep.compact_like, detail)


def _gaussian(grid: GridSpec) -> GridFunction:
    """f(t) = exp(-(ln t)^2), whose Mellin transform is sqrt(pi) exp(-x^2/4)."""
    return GridFunction.from_callable(grid, lambda t: np.exp(-np.log(t) ** 2))


# -- identities suite -----------------------------------------------------------------


def check_mellin_round_trip(ctx: SuiteContext) -> Measurement:
    f = _gaussian(ctx.grid)
    back = mellin_inverse(mellin_forward(f))
    err = np.max(np.abs(back.samples - f.samples)) / np.max(np.abs(f.samples))
    return _at_most(err, ctx.limits.transform_rel)


def check_mellin_gaussian(ctx: SuiteContext) -> Measurement:
    grid = ctx.grid
    spectrum = mellin_forward(_gaussian(grid))
    exact = np.sqrt(np.pi) * np.exp(-(grid.x**2) / 4.0)
    err = np.max(np.abs(spectrum.values - exact)) / np.max(exact)
    ctx.plot_data["mellin_gaussian"] = pd.DataFrame(
        {"x": grid.x, "re": spectrum.values.real, "im": spectrum.values.imag, "exact": exact}
    )
    return _at_most(err, ctx.limits.transform_rel, f"tail ratio {spectrum.metadata['tail_ratio']:.1e}")


def check_algebra_pointwise(ctx: SuiteContext) -> Measurement:
    """s^2 - r^2 = 1, p+ p- = -r^2/4 and (p+-)^2 = p+- + r^2/4 on the x-grid."""
    x = ctx.grid.x
    parts, frames = [], []
    for y in ctx.y_values:
        s = ctx.cached_values({"symbol": "s_y", "y": y}, lambda y=y: s_y_values(y, x))
        r = ctx.cached_values({"symbol": "r_y", "y": y}, lambda y=y: r_y_values(y, x))
        plus, minus, quarter = 0.5 * (1.0 + s), 0.5 * (1.0 - s), 0.25 * r * r
        err = max(
            np.max(np.abs(s * s - r * r - 1.0)),
            np.max(np.abs(plus * minus + quarter)),
            np.max(np.abs(plus * plus - plus - quarter)),
            np.max(np.abs(minus * minus - minus - quarter)),
        )
        parts.append((f"y={y:g}", _at_most(err, ctx.limits.algebra_pointwise)))
        frames.append(
            pd.DataFrame({"y": y, "x": x, "s_re": s.real, "s_im": s.imag, "r_re": r.real, "r_im": r.imag})
        )
    ctx.plot_data["symbol_traces"] = pd.concat(frames, ignore_index=True)
    return _combine(parts)


def check_algebra_operator(ctx: SuiteContext) -> Measurement:
    """P+ P- = -R^2/4, (P+-)^2 = P+- + R^2/4 and P+ + P- = I as operators."""
    grid, probes = ctx.grid, ctx.probes
    ident = identity(grid)
    parts = []
    for y in ctx.y_values:
        plus = conv_operator(make_p_y(y, "+", grid))
        minus = conv_operator(make_p_y(y, "-", grid))
        r = conv_operator(make_r_y(y, grid))
        quarter = (r @ r).scaled(0.25)
        err = max(
            relative_defect(plus @ minus, quarter.scaled(-1.0), probes),
            relative_defect(plus @ plus, plus + quarter, probes),
            relative_defect(minus @ minus, minus + quarter, probes),
            relative_defect(plus + minus, ident, probes),
        )
        parts.append((f"y={y:g}", _at_most(err, ctx.limits.algebra_operator)))
    return _combine(parts)


def check_conv_identity(ctx: SuiteContext) -> Measurement:
    op = conv_operator(constant_multiplier(ctx.grid, 1.0))
    return _at_most(relative_defect(op, identity(ctx.grid), ctx.probes), ctx.limits.algebra_operator)


def check_conv_homomorphism(ctx: SuiteContext) -> Measurement:
    grid = ctx.grid
    parts = []
    for y in ctx.y_values:
        s, r = make_s_y(y, grid), make_r_y(y, grid)
        product = conv_operator(combine_multipliers(s, r, "mul"))
        err = relative_defect(conv_operator(s) @ conv_operator(r), product, ctx.probes)
        parts.append((f"y={y:g}", _at_most(err, ctx.limits.algebra_operator)))
    return _combine(parts)


def check_pv_cross_check(ctx: SuiteContext) -> Measurement:
    """Multiplier route for S_y against direct principal-value quadrature."""
    grid = ctx.grid
    u = grid.u
    gauss = np.exp(u / grid.p - u**2)[None, :]
    probes = np.vstack([ctx.probes, gauss])
    parts = []
    for y in ctx.y_values:
        err = relative_defect(cauchy_sio_direct(grid, y), conv_operator(make_s_y(y, grid)), probes)
        parts.append((f"y={y:g}", _at_most(err, ctx.limits.pv_rel)))
    return _combine(parts)


def check_pv_kernel_antisymmetry(ctx: SuiteContext) -> Measurement:
    rng = ctx.rng("pv_kernel_antisymmetry")
    p = ctx.grid.p
    t = np.exp(rng.uniform(-8.0, 8.0, 1000))
    tau = np.exp(rng.uniform(-8.0, 8.0, 1000))
    k = cauchy_kernel(t, tau, p, p)
    err = np.max(np.abs(k + cauchy_kernel(tau, t, p, p)) / np.abs(k))
    return _at_most(err, ctx.limits.algebra_pointwise, "unweighted kernel at y = p")


# -- pdo suite --------------------------------------------------------------------------


def check_pdo_reduces_to_conv(ctx: SuiteContext) -> Measurement:
    grid = ctx.grid
    parts = []
    for y in ctx.y_values:
        s = make_s_y(y, grid)
        err = np.max(np.abs(pdo_operator(from_multiplier(s)).matrix - conv_operator(s).matrix))
        parts.append((f"y={y:g}", _at_most(err, ctx.limits.algebra_operator)))
    return _combine(parts)


def check_pdo_diagonal(ctx: SuiteContext) -> Measurement:
    grid = ctx.grid
    c = ctx.config.fixture(ctx.config.pair.c)
    op = pdo_operator(from_t_function(grid, c, c.name))
    err = np.max(np.abs(op.matrix - multiplication(grid, c(grid.t)).matrix))
    return _at_most(err, ctx.limits.algebra_operator)


def check_three_factor(ctx: SuiteContext) -> Measurement:
    """Op(a) Op(b) Op(c) = Op(abc) for t-only a and x-only c."""
    grid = ctx.grid
    d_fixture = ctx.config.fixture(ctx.config.pair.d)
    dc, _ = ctx.pair()
    a = from_t_function(grid, d_fixture, d_fixture.name)
    b = symbol_binomial_R(dc)
    c = from_multiplier(make_s_y(2.0, grid))
    lhs = pdo_operator(a) @ pdo_operator(b) @ pdo_operator(c)
    rhs = pdo_operator(symbol_algebra(symbol_algebra(a, b, "mul"), c, "mul"))
    return _at_most(relative_defect(lhs, rhs, ctx.probes), ctx.limits.algebra_operator)


def check_pdo_bound(ctx: SuiteContext) -> Measurement:
    """||Op(a)|| / sup_t ||a(t, .)||_V for every binomial symbol; only finiteness is asserted."""
    parts = []
    for d in ctx.binomials():
        for symbol in (symbol_binomial_R(d), ctx.series(d)[0]):
            norm = op_norm_estimate(pdo_operator(symbol), seed=ctx.config.seed)
            ratio = norm / symbol.sup_v_norm
            parts.append((symbol.name, Measurement(ratio, None, bool(np.isfinite(ratio) and ratio > 0))))
    return _combine(parts)


def check_shift_identities(ctx: SuiteContext) -> Measurement:
    """Inverse round trip, monotonicity and telescoping of psi along iterates."""
    cfg = ctx.config
    t = np.sort(np.exp(ctx.rng("shift_identities").uniform(-8.0, 8.0, 1000)))
    parts = []
    for name in cfg.shifts:
        s = cfg.shift(name)
        forward = shift_apply(s, t)
        err = float(np.max(np.abs(shift_inverse(s, forward) - t) / t))
        orbit, acc = t.copy(), np.zeros_like(t)
        for n in range(1, TELESCOPING_STEPS + 1):
            step = shift_apply(s, orbit)
            acc += np.log(step / orbit)
            orbit = step
            iterate = shift_iterate(s, n, cfg.max_iterate)
            err = max(err, float(np.max(np.abs(np.log(iterate(t) / t) - acc))))
        monotone = bool(np.all(np.diff(forward) > 0))
        m = _at_most(err, ctx.limits.shift_identity, "" if monotone else "not increasing")
        m.passed = m.passed and monotone
        parts.append((name, m))
    result = _combine(parts)
    c, alpha = cfg.fixture(cfg.pair.c), cfg.shift(cfg.pair.alpha)
    drift = drift_along_shift(c, alpha, fiber_points(ctx.grid))
    result.detail += f"; |c(alpha(t)) - c(t)| at fiber samples {max(drift):.1e}"
    return result


def check_shift_isometry(ctx: SuiteContext) -> Measurement:
    grid = ctx.grid
    parts = []
    for name in ctx.config.shifts:
        s = ctx.config.shift(name)
        for direction in (1, -1):
            op = shift_operator(s, grid, direction)
            err = max(
                abs(lp_norm(from_weighted(grid, op.apply_weighted(phi))) / lp_norm(from_weighted(grid, phi)) - 1.0)
                for phi in ctx.probes
            )
            parts.append((f"{name}^{direction:+d}", _at_most(err, ctx.limits.shift_isometry)))
    return _combine(parts)


def check_shift_round_trip(ctx: SuiteContext) -> Measurement:
    grid, ident = ctx.grid, identity(ctx.grid)
    parts = []
    for name in ctx.config.shifts:
        s = ctx.config.shift(name)
        fwd, back = shift_operator(s, grid, 1), shift_operator(s, grid, -1)
        err = max(relative_defect(fwd @ back, ident, ctx.probes), relative_defect(back @ fwd, ident, ctx.probes))
        parts.append((name, _at_most(err, ctx.limits.shift_round_trip)))
    return _combine(parts)


def check_shift_realization(ctx: SuiteContext) -> Measurement:
    """U_gamma R_y against Op(d)."""
    grid = ctx.grid
    parts = []
    for d in ctx.binomials():
        shift = shift_operator(d.gamma, grid, d.epsilon)
        for y in ctx.y_values:
            dy = d.with_params(y=y)
            err = relative_defect(
                shift @ conv_operator(make_r_y(y, grid)), pdo_operator(symbol_shift_R(dy)), ctx.probes
            )
            parts.append((f"{d.label} y={y:g}", _at_most(err, ctx.limits.realization)))
    return _combine(parts)


def check_binomial_realization(ctx: SuiteContext) -> Measurement:
    """(I - v U_gamma) R_y against Op(a)."""
    grid = ctx.grid
    parts = []
    for d in ctx.binomials():
        for y in ctx.y_values:
            dy = d.with_params(y=y)
            lhs = binomial_operator(dy) @ conv_operator(make_r_y(y, grid))
            err = relative_defect(lhs, pdo_operator(symbol_binomial_R(dy)), ctx.probes)
            parts.append((f"{d.label} y={y:g}", _at_most(err, ctx.limits.realization)))
    return _combine(parts)


def check_neumann_vs_series(ctx: SuiteContext) -> Measurement:
    """Neumann solve of (I - v U) g = R_2 phi against Op(c) phi."""
    grid = ctx.grid
    rows = grid.interior_mask()
    r = conv_operator(make_r_y(2.0, grid))
    parts = []
    for d in ctx.binomials():
        series = pdo_operator(ctx.series(d)[0])
        worst = 0.0
        for phi in ctx.probes:
            rhs = from_weighted(grid, r.apply_weighted(phi))
            solved = neumann_apply(d.v, d.gamma, rhs, tol=ctx.tol, mu=d.mu, direction=d.epsilon)
            diff = weighted_samples(solved.result) - series.apply_weighted(phi)
            worst = max(worst, float(np.linalg.norm(diff[rows]) / np.linalg.norm(phi)))
        parts.append((d.label, _at_most(worst, ctx.limits.neumann_series, f"{solved.n_terms} terms")))
    return _combine(parts)


def check_fiber_series(ctx: SuiteContext) -> Measurement:
    """Partial fiber sums against the closed form, within the geometric tail bound."""
    x = ctx.grid.x
    parts = []
    for d in ctx.binomials():
        n_terms = ctx.series(d)[1].n_terms
        r = r_y_values(d.y, x)
        for pt in fiber_points(ctx.grid):
            q = abs(d.mu * d.v.fiber_value(pt))
            closed = r / d.fiber_factor(pt, x)
            err = float(np.max(np.abs(fiber_series_partial_sum(d, pt, n_terms) - closed)))
            bound = q ** (n_terms + 1) / (1.0 - q) * float(np.max(np.abs(r))) if q > 0 else 0.0
            parts.append((f"{d.label}@{pt.label}", Measurement(err, bound, err <= bound + 1e-14)))
    return _combine(parts)


def check_series_honesty(ctx: SuiteContext) -> Measurement:
    parts = []
    for d in ctx.binomials():
        report = ctx.series(d)[1]
        parts.append(
            (d.label, Measurement(report.extension_change, report.tail_bound, report.honest, f"N={report.n_terms}"))
        )
    return _combine(parts)


def check_root_test(ctx: SuiteContext) -> Measurement:
    start = ctx.limits.root_test_from
    parts = []
    for d in ctx.binomials():
        roots = ctx.series(d)[1].root_test
        tail = roots[start - 1 :] or roots[-1:]
        value = max(tail) if tail else 0.0
        parts.append((d.label, _at_most(value, ctx.limits.root_test)))
    return _combine(parts)


def check_semi_commutator(ctx: SuiteContext) -> Measurement:
    """Op(a) Op(b) - Op(ab) for binomial symbols a and series symbols b."""
    dc, dd = ctx.pair()
    cases = [(f"a[{dc.label}] c[{dd.label}]", symbol_binomial_R(dc), ctx.series(dd)[0])]
    cases += [(f"a c [{d.label}]", symbol_binomial_R(d), ctx.series(d)[0]) for d in ctx.binomials()]
    parts = []
    for label, a, b in cases:
        defect = pdo_operator(a) @ pdo_operator(b) - pdo_operator(symbol_algebra(a, b, "mul"))
        sv = singular_values(defect)
        parts.append(_compactness(ctx, defect, label, a.sup_v_norm * b.sup_v_norm, sv))
        if "sv_semi_commutator" not in ctx.plot_data:
            ctx.plot_data["sv_semi_commutator"] = _sv_frame(sv)
    return _combine(parts)


def check_calibration(ctx: SuiteContext) -> Measurement:
    """The compactness proxy must classify R_2^2, [cI, R_2], I and S_2 correctly."""
    grid = ctx.grid
    r2 = conv_operator(make_r_y(2.0, grid))
    c = ctx.config.fixture(ctx.config.pair.c)
    mult = multiplication(grid, c.of_u(grid.u), c.name)
    cases = {
        "R_2^2": (r2 @ r2, True),
        f"[{c.name}I,R_2]": (mult @ r2 - r2 @ mult, True),
        "I": (identity(grid), False),
        "S_2": (conv_operator(make_s_y(2.0, grid)), False),
    }
    verdicts, wrong = [], []
    curves: Dict[str, np.ndarray] = {"k": np.arange(1, grid.n_t + 1)}
    for label, (op, expected) in cases.items():
        rep = compactness_proxy(op, ctx.limits.sv_ratio, ctx.limits.edge_response, ctx.config.edge_frequency)
        verdicts.append(f"{label}={rep.verdict}")
        if rep.compact_like != expected:
            wrong.append(label)
        sv = rep.singular_values
        curves[label] = sv / sv[0] if sv[0] > 0 else sv
    ctx.plot_data["sv_calibration"] = pd.DataFrame(curves)
    detail = ", ".join(verdicts) + (f"; misclassified: {', '.join(wrong)}" if wrong else "")
    return Measurement(float(len(wrong)), 0.0, not wrong, detail)


def check_etilde(ctx: SuiteContext) -> Measurement:
    symbols = []
    for d in ctx.binomials():
        symbols += [symbol_binomial_R(d), ctx.series(d)[0]]
    symbols.append(ctx.h(*ctx.pair()))
    parts = []
    for a in symbols:
        rep = check_E_tilde(a, ctx.limits.etilde_tail, ctx.limits.etilde_so)
        failing = [name for name, ok in rep.verdicts.items() if not ok]
        parts.append((a.name, Measurement(float(len(failing)), 0.0, not failing, ",".join(failing))))
    return _combine(parts)


# -- index suite ----------------------------------------------------------------------


def check_disk_sweep(ctx: SuiteContext) -> Measurement:
    grid = ctx.grid
    rng = ctx.rng("disk_sweep")
    x = np.linspace(-grid.x_max, grid.x_max, 4 * grid.n_x)
    excess, min_g, failures = -np.inf, np.inf, 0
    for _ in range(DISK_SAMPLES):
        radii = rng.uniform(0.0, 0.95, 2)
        angles = rng.uniform(0.0, 2.0 * np.pi, 2)
        psi, zeta = rng.uniform(-2.0, 2.0, 2)
        v, w = radii * np.exp(1j * angles)
        f_rep = disk_check_f(v, w, psi, zeta, x)
        g_rep = disk_check_g(v, w, psi, zeta, x)
        excess = max(excess, f_rep.max_distance - f_rep.radius, g_rep.max_distance - g_rep.radius)
        min_g = min(min_g, g_rep.min_modulus)
        failures += int(not f_rep.passed) + int(not g_rep.passed)
    passed = failures == 0 and excess <= ctx.limits.disk_slack and min_g > 0
    return Measurement(float(excess), ctx.limits.disk_slack, passed, f"{DISK_SAMPLES} samples, min |g| = {min_g:.3g}")


def check_ellipticity(ctx: SuiteContext) -> Measurement:
    """min |h| at mu = 1, y = 2 is asserted; other y values are reported."""
    dc, dd = ctx.pair()
    try:
        h = ctx.h(dc, dd)
    except (PreconditionError, DomainError) as exc:
        # no series symbol exists; report the coefficient that breaks the contraction
        peak, where = coefficient_peak(dc, dd)
        detail = f"not elliptic: |mu v| = {peak:.3g} at {where}; {exc}"
        return Measurement(peak, 1.0, False, detail)
    rep = ellipticity_check(h, ctx.limits.ellipticity)
    ctx.plot_data["loop_h"] = loop_frame(build_loop(h))
    others = []
    for y in ctx.y_values:
        if y == 2.0:
            continue
        try:
            hy = ctx.h(dc.with_params(y=y), dd.with_params(y=y))
            others.append(f"y={y:g}: min |h| {ellipticity_check(hy).min_modulus:.3g}")
        except MellinSIOError as exc:
            others.append(f"y={y:g}: {exc}")
    return Measurement(rep.min_modulus, rep.threshold, rep.passed, "; ".join(others))


def check_fiber_factorization(ctx: SuiteContext) -> Measurement:
    """h from the fiber rows of a and c equals v l; boundary rows of h are exactly 1."""
    base_c, base_d = ctx.pair()
    worst, boundary = 0.0, 0.0
    for mu, y in itertools.product((0.5, 1.0), ctx.y_values):
        dc, dd = base_c.with_params(mu=mu, y=y), base_d.with_params(mu=mu, y=y)
        worst = max(worst, fiber_factorization_defect(dc, dd, ctx.series(dc)[0], ctx.series(dd)[0]))
        h = ctx.h(dc, dd)
        boundary = max(boundary, float(np.max(np.abs(h.boundary_minus - 1.0))), float(np.max(np.abs(h.boundary_plus - 1.0))))
    m = _at_most(worst, ctx.limits.fiber_factorization, f"boundary deviation {boundary:.1e}")
    m.passed = m.passed and boundary == 0.0
    return m


def check_index_zero(ctx: SuiteContext) -> Measurement:
    scan = ctx.homotopy()
    worst = max(abs(w) for row in scan.rows for w in row.windings)
    residue = max(row.residue for row in scan.rows)
    passed = scan.index_zero and residue < ctx.limits.winding_residue and all(r.elliptic for r in scan.rows)
    detail = f"{scan.verdict}; {len(scan.rows)} steps; max residue {residue:.2e}"
    return Measurement(float(worst), 0.0, passed, detail)


def check_identity_at_zero(ctx: SuiteContext) -> Measurement:
    """V, L and H all reduce to the identity at mu = 0."""
    ident = identity(ctx.grid)
    ops = build_V_L_H(*ctx.pair(mu=0.0), ctx.tol)
    err = max(relative_defect(op, ident, ctx.probes) for op in ops)
    return _at_most(err, ctx.limits.identity_at_zero)


def check_scan_residual(ctx: SuiteContext) -> Measurement:
    rows = ctx.homotopy().rows
    worst = max(rows, key=lambda r: r.residual)
    return _at_most(worst.residual, ctx.limits.scan_residual, f"worst at mu={worst.mu:.2f}")


def check_norm_lipschitz(ctx: SuiteContext) -> Measurement:
    rows = ctx.homotopy().rows[1:]
    excess = max((r.norm_step - r.lipschitz_bound for r in rows), default=0.0)
    return Measurement(float(excess), 0.0, all(r.lipschitz_ok for r in rows), "||V_mu|| step minus bound")


def check_regularization_chain(ctx: SuiteContext) -> Measurement:
    """V L - H and L V - H compact-like at every scanned mu."""
    rows = ctx.homotopy().rows
    ratio = max(max(r.vl_ratio, r.lv_ratio) for r in rows)
    edge = max(r.max_edge for r in rows)
    bad = [f"{r.mu:.2f}" for r in rows if not r.compact_like]
    detail = f"max edge response {edge:.1e}" + (f"; not compact-like at mu {', '.join(bad)}" if bad else "")
    return Measurement(ratio, ctx.limits.sv_ratio, not bad, detail)


def check_kernel_dims(ctx: SuiteContext) -> Measurement:
    v = build_W(*ctx.pair())
    sv = singular_values(v)
    k, k_adj = kernel_dims(v, ctx.limits.kernel_eps, singular=sv)
    ctx.operators["V"] = v
    ctx.plot_data["sv_V"] = _sv_frame(sv)
    detail = f"dim ker ~ {k}, dim ker* ~ {k_adj}; consistency indicator only"
    return Measurement(float(k), 0.0, k == 0 and k_adj == 0, detail)


def check_regularizer_W(ctx: SuiteContext) -> Measurement:
    """W^(-1) W - I compact-like for all four shift directions."""
    grid, pair = ctx.grid, ctx.config.pair
    parts = []
    for e1, e2 in itertools.product((1, -1), repeat=2):
        dc, dd = ctx.pair(epsilon1=e1, epsilon2=e2)
        w = build_W(dc, dd)
        w_reg = regularizer_W(dc, dd, ctx.tol, f=ctx.f(dc, dd))
        defect = w_reg @ w - identity(grid)
        sv = singular_values(defect)
        if (e1, e2) == (pair.epsilon1, pair.epsilon2):
            ctx.operators["W_regularizer"] = w_reg
            ctx.plot_data["sv_regularizer"] = _sv_frame(sv)
        parts.append(_compactness(ctx, defect, f"e1={e1:+d},e2={e2:+d}", singular=sv))
    return _combine(parts)


def check_g_y_relation(ctx: SuiteContext) -> Measurement:
    """Op(g_y) W - R_y compact-like for every y."""
    grid = ctx.grid
    dc, dd = ctx.pair()
    w = build_W(dc, dd)
    f = ctx.f(dc, dd)
    parts = []
    for y in ctx.y_values:
        g = pdo_operator(symbol_g_y(dc.with_params(y=y), dd.with_params(y=y), ctx.tol, f=f))
        parts.append(_compactness(ctx, g @ w - conv_operator(make_r_y(y, grid)), f"y={y:g}"))
    return _combine(parts)


def check_winding_stability(ctx: SuiteContext) -> Measurement:
    """Winding of the h loop survives resampling and doubling the x-resolution."""
    dc, dd = ctx.pair()
    loop = build_loop(ctx.h(dc, dd))
    base = winding_number(loop)
    fine = ctx.grid.model_copy(update={"n_x": 2 * ctx.grid.n_x})
    doubled = winding_number(build_loop(symbol_h(dc.with_params(grid=fine), dd.with_params(grid=fine), ctx.tol)))
    thinned = winding_number(BoundaryLoop(loop.points[::2], loop.label))
    mismatches = int(doubled != base) + int(thinned != base)
    detail = f"winding {base}, doubled x-grid {doubled}, every other sample {thinned}"
    return Measurement(float(mismatches), 0.0, mismatches == 0, detail)


def check_grid_stability(ctx: SuiteContext) -> Measurement:
    """Algebra, realization, fiber and index verdicts unchanged when n_t and n_x are doubled."""
    dc, dd = ctx.pair()
    report = grid_stability(
        dc,
        dd,
        ctx.binomials(),
        ctx.limits,
        ctx.y_values,
        steps=ctx.config.homotopy_steps,
        tol=ctx.tol,
        seed=ctx.config.seed,
    )
    ctx.plot_data["grid_stability"] = report.to_frame()
    changed = report.mismatches
    failing = [name for name, v in report.coarse.items() if not v.passed and name not in changed]
    detail = f"n_t {report.grid.n_t} -> {report.fine.n_t}, n_x {report.grid.n_x} -> {report.fine.n_x}; "
    detail += f"changed: {', '.join(changed)}" if changed else f"{len(report.coarse)} verdicts unchanged"
    if failing:
        detail += f"; failing on both grids: {', '.join(failing)}"
    return Measurement(float(len(changed)), 0.0, report.stable, detail)


def check_negative_controls(ctx: SuiteContext) -> Measurement:
    """r_2 must fail ellipticity and I must fail the compactness proxy."""
    grid = ctx.grid
    r_rep = ellipticity_check(from_multiplier(make_r_y(2.0, grid)), ctx.limits.ellipticity)
    i_rep = compactness_proxy(identity(grid), ctx.limits.sv_ratio, ctx.limits.edge_response, ctx.config.edge_frequency)
    wrong = []
    if r_rep.passed:
        wrong.append("r_2 passed ellipticity")
    if i_rep.compact_like:
        wrong.append("I looked compact")
    detail = "; ".join(wrong) or "r_2 not elliptic, I NOT-COMPACT"
    return Measurement(float(len(wrong)), 0.0, not wrong, detail)


# -- registry ---------------------------------------------------------------------------


IDENTITY_CHECKS: Dict[str, CheckFn] = {
    "mellin_round_trip": check_mellin_round_trip,
    "mellin_gaussian": check_mellin_gaussian,
    "algebra_pointwise": check_algebra_pointwise,
    "algebra_operator": check_algebra_operator,
    "conv_identity": check_conv_identity,
    "conv_homomorphism": check_conv_homomorphism,
    "pv_cross_check": check_pv_cross_check,
    "pv_kernel_antisymmetry": check_pv_kernel_antisymmetry,
}

PDO_CHECKS: Dict[str, CheckFn] = {
    "pdo_reduces_to_conv": check_pdo_reduces_to_conv,
    "pdo_diagonal": check_pdo_diagonal,
    "three_factor": check_three_factor,
    "pdo_bound": check_pdo_bound,
    "shift_identities": check_shift_identities,
    "shift_isometry": check_shift_isometry,
    "shift_round_trip": check_shift_round_trip,
    "shift_realization": check_shift_realization,
    "binomial_realization": check_binomial_realization,
    "neumann_vs_series": check_neumann_vs_series,
    "fiber_series": check_fiber_series,
    "series_honesty": check_series_honesty,
    "root_test": check_root_test,
    "semi_commutator": check_semi_commutator,
    "calibration": check_calibration,
    "etilde": check_etilde,
}

INDEX_CHECKS: Dict[str, CheckFn] = {
    "disk_sweep": check_disk_sweep,
    "ellipticity": check_ellipticity,
    "fiber_factorization": check_fiber_factorization,
    "index_zero": check_index_zero,
    "identity_at_zero": check_identity_at_zero,
    "scan_residual": check_scan_residual,
    "norm_lipschitz": check_norm_lipschitz,
    "regularization_chain": check_regularization_chain,
    "kernel_dims": check_kernel_dims,
    "regularizer_W": check_regularizer_W,
    "g_y_relation": check_g_y_relation,
    "winding_stability": check_winding_stability,
    "grid_stability": check_grid_stability,
    "negative_controls": check_negative_controls,
}

SUITE_REGISTRY: Dict[str, Dict[str, CheckFn]] = {
    "identities": IDENTITY_CHECKS,
    "pdo": PDO_CHECKS,
    "index": INDEX_CHECKS,
}


def available_checks(suite: str) -> List[str]:
    if suite not in SUITE_REGISTRY:
        raise ConfigurationError(f"Unknown suite: {suite}. Available: {list(SUITE_REGISTRY.keys())}")
    return list(SUITE_REGISTRY[suite].keys())


def _clean(value: Optional[float]) -> Optional[float]:
    if value is None:
        return None
    value = float(value)
    return value if np.isfinite(value) else None


def run_suite(name: str, config: RunConfig, cache: Optional[SymbolCache] = None) -> SuiteReport:
    """
    Run the checks of one suite.

    The config's ``suites`` entry selects and orders the checks; without one
    every registered check runs.

    Args:
        name: Suite name ('identities', 'pdo' or 'index')
        config: Validated run configuration
        cache: Optional on-disk cache for sampled symbol arrays

    Returns:
        Report with exactly one record per selected check

    Raises:
        ConfigurationError: If the suite or a selected check is unknown
    """
    checks = SUITE_REGISTRY.get(name)
    if checks is None:
        raise ConfigurationError(f"Unknown suite: {name}. Available: {list(SUITE_REGISTRY.keys())}")
    selected = config.suite_checks(name)
    names = list(checks) if selected is None else list(dict.fromkeys(selected))
    unknown = [c for c in names if c not in checks]
    if unknown:
        raise ConfigurationError(f"Unknown check in suite '{name}': {unknown[0]}. Available: {list(checks.keys())}")

    ctx = SuiteContext(config, cache)
    records: List[CheckRecord] = []
    for check in names:
        start = time.perf_counter()
        try:
            m = checks[check](ctx)
        except (MellinSIOError, np.linalg.LinAlgError) as exc:
            logger.warning("%s/%s raised %s: %s", name, check, type(exc).__name__, exc)
            m = Measurement(None, None, False, f"{type(exc).__name__}: {exc}")
        elapsed = time.perf_counter() - start
        record = CheckRecord(check, _clean(m.value), _clean(m.threshold), bool(m.passed), m.detail, elapsed)
        logger.info("%s/%s: %s (%s) in %.2fs", name, check, record.status, _fmt(record.value), elapsed)
        records.append(record)

    return SuiteReport(
        suite=name,
        fixtures=sorted(config.fixtures),
        grid=config.grid,
        seed=config.seed,
        checks=records,
        plot_data=ctx.plot_data,
        operators=ctx.operators,
        notes=ctx.notes,
    )
