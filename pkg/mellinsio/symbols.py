"""
Mellin multiplier symbols and bivariate PDO symbols.

A MultiplierSymbol a(x) samples a function of bounded variation on the
x-grid together with its limits at -inf and +inf. A BivariateSymbol samples
a(t, x) on the (t-node, x-node) product grid and carries the boundary
columns a(t, -inf), a(t, +inf) and fiber rows a(xi, .) for points xi near
0 and infinity.

Symbols keep an optional evaluator so operators can be assembled on any
frequency grid without resampling the stored values.
"""

from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, List, Literal, Optional, Tuple, Union

import numpy as np

from .errors import DomainError, InvalidInputError
from .grid import GridSpec

logger = logging.getLogger(__name__)

FiberLabel = Literal["zero", "infinity"]
RowEvaluator = Callable[[np.ndarray], np.ndarray]


# -- analytic building blocks -------------------------------------------------


def _coth(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    pos = z.real >= 0
    e = np.exp(-2.0 * z[pos])
    out[pos] = (1.0 + e) / (1.0 - e)
    e = np.exp(2.0 * z[~pos])
    out[~pos] = -(1.0 + e) / (1.0 - e)
    return out


def _csch(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    pos = z.real >= 0
    e = np.exp(-z[pos])
    out[pos] = 2.0 * e / (1.0 - e * e)
    e = np.exp(z[~pos])
    out[~pos] = -2.0 * e / (1.0 - e * e)
    return out


def _check_y(y: float) -> float:
    if not (1.0 < y < np.inf):
        raise DomainError(f"y must lie in (1, inf), got {y}")
    return float(y)


def s_y_values(y: float, x: np.ndarray) -> np.ndarray:
    """coth(pi (x + i/y))."""
    y = _check_y(y)
    return _coth(np.pi * (np.asarray(x, dtype=float) + 1j / y))


def r_y_values(y: float, x: np.ndarray) -> np.ndarray:
    """1 / sinh(pi (x + i/y))."""
    y = _check_y(y)
    return _csch(np.pi * (np.asarray(x, dtype=float) + 1j / y))


def p_y_values(y: float, sign: int, x: np.ndarray) -> np.ndarray:
    """(1 +- s_y) / 2."""
    return 0.5 * (1.0 + sign * s_y_values(y, x))


def _parse_sign(sign: Union[int, str]) -> int:
    if sign in (1, "+", "plus"):
        return 1
    if sign in (-1, "-", "minus"):
        return -1
    raise InvalidInputError(f"Unknown sign: {sign}. Available: ['+', '-']")


# -- univariate symbols ---------------------------------------------------------


def _variation(values: np.ndarray, limit_minus: complex, limit_plus: complex) -> float:
    """Discrete total variation including jumps to the limits at the tails."""
    return float(
        np.sum(np.abs(np.diff(values)))
        + abs(values[0] - limit_minus)
        + abs(limit_plus - values[-1])
    )


@dataclass(frozen=True, eq=False)
class MultiplierSymbol:
    """A Mellin multiplier a(x) sampled on the x-grid."""

    spec: GridSpec
    values: np.ndarray
    limit_minus: complex
    limit_plus: complex
    total_variation: float
    name: str = "multiplier"
    func: Optional[Callable[[np.ndarray], np.ndarray]] = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.spec.n_x,):
            raise InvalidInputError(
                f"multiplier needs {self.spec.n_x} samples, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidInputError(f"multiplier '{self.name}' has non-finite samples")
        object.__setattr__(self, "values", values)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Evaluate at arbitrary frequencies, using the limits outside the grid."""
        x = np.asarray(x, dtype=float)
        if self.func is not None:
            return np.asarray(self.func(x), dtype=complex)
        grid_x = self.spec.x
        re = np.interp(x, grid_x, self.values.real, self.limit_minus.real, self.limit_plus.real)
        im = np.interp(x, grid_x, self.values.imag, self.limit_minus.imag, self.limit_plus.imag)
        return re + 1j * im

    def tail_mismatch(self) -> float:
        """Distance between the stored limits and the outermost samples."""
        return float(
            max(abs(self.values[0] - self.limit_minus), abs(self.values[-1] - self.limit_plus))
        )


def multiplier_from_function(
    spec: GridSpec,
    func: Callable[[np.ndarray], np.ndarray],
    limit_minus: complex,
    limit_plus: complex,
    name: str,
) -> MultiplierSymbol:
    values = np.asarray(func(spec.x), dtype=complex)
    return MultiplierSymbol(
        spec=spec,
        values=values,
        limit_minus=complex(limit_minus),
        limit_plus=complex(limit_plus),
        total_variation=_variation(values, limit_minus, limit_plus),
        name=name,
        func=func,
    )


def multiplier_from_values(
    spec: GridSpec,
    values: np.ndarray,
    limit_minus: Optional[complex] = None,
    limit_plus: Optional[complex] = None,
    name: str = "sampled",
) -> MultiplierSymbol:
    """Build a multiplier from raw samples; limits default to the end samples."""
    values = np.asarray(values, dtype=complex)
    lm = complex(values[0] if limit_minus is None else limit_minus)
    lp = complex(values[-1] if limit_plus is None else limit_plus)
    return MultiplierSymbol(
        spec=spec,
        values=values,
        limit_minus=lm,
        limit_plus=lp,
        total_variation=_variation(values, lm, lp),
        name=name,
    )


def constant_multiplier(spec: GridSpec, c: complex) -> MultiplierSymbol:
    return multiplier_from_function(
        spec, lambda x: np.full(np.shape(x), c, dtype=complex), c, c, f"const({c})"
    )


def make_s_y(y: float, spec: GridSpec) -> MultiplierSymbol:
    """
    Symbol s_y(x) = coth(pi (x + i/y)) of the weighted singular integral S_y.

    Raises:
        DomainError: If y is outside (1, inf)
    """
    y = _check_y(y)
    return multiplier_from_function(spec, lambda x: s_y_values(y, x), -1.0, 1.0, f"s_{y:g}")


def make_r_y(y: float, spec: GridSpec) -> MultiplierSymbol:
    """Symbol r_y(x) = 1/sinh(pi (x + i/y)) of R_y."""
    y = _check_y(y)
    return multiplier_from_function(spec, lambda x: r_y_values(y, x), 0.0, 0.0, f"r_{y:g}")


def make_p_y(y: float, sign: Union[int, str], spec: GridSpec) -> MultiplierSymbol:
    """Projection symbols p_y^+- = (1 +- s_y)/2."""
    y = _check_y(y)
    sgn = _parse_sign(sign)
    limit_minus, limit_plus = (0.0, 1.0) if sgn > 0 else (1.0, 0.0)
    label = "+" if sgn > 0 else "-"
    return multiplier_from_function(
        spec, lambda x: p_y_values(y, sgn, x), limit_minus, limit_plus, f"p_{y:g}{label}"
    )


def v_norm(a: MultiplierSymbol) -> float:
    """
    V(R)-norm: sup-norm plus total variation.

    The sup runs over the samples and both limits.
    """
    sup = max(float(np.max(np.abs(a.values))), abs(a.limit_minus), abs(a.limit_plus))
    return sup + a.total_variation


def combine_multipliers(
    a: MultiplierSymbol, b: MultiplierSymbol, op: Literal["add", "mul"]
) -> MultiplierSymbol:
    """Pointwise sum or product of two multipliers on the same grid."""
    if a.spec != b.spec:
        raise InvalidInputError("multipliers live on different grids")
    fn = _BINARY_OPS.get(op)
    if fn is None:
        raise InvalidInputError(f"Unknown symbol operation: {op}. Available: {list(_BINARY_OPS)}")
    func = None
    if a.func is not None and b.func is not None:
        fa, fb = a.func, b.func
        func = lambda x: fn(fa(x), fb(x))  # noqa: E731
    lm, lp = fn(a.limit_minus, b.limit_minus), fn(a.limit_plus, b.limit_plus)
    values = fn(a.values, b.values)
    return MultiplierSymbol(
        spec=a.spec,
        values=values,
        limit_minus=complex(lm),
        limit_plus=complex(lp),
        total_variation=_variation(values, lm, lp),
        name=f"({a.name} {op} {b.name})",
        func=func,
    )


_BINARY_OPS: Dict[str, Callable] = {
    "add": lambda p, q: p + q,
    "mul": lambda p, q: p * q,
}


# -- fibers -----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FiberPoint:
    """A sample point t_n standing in for a fiber over 0 or infinity."""

    label: FiberLabel
    t: float
    index: int = 0


def fiber_points(spec: GridSpec, count: int = 1, margin: float = 1.0) -> List[FiberPoint]:
    """
    Sample points along geometric sequences t_n = exp(+-2^k) toward 0 and inf.

    The outermost member of each sequence that stays ``margin`` inside the log
    grid is used. With count > 1 the sequences are phase shifted by
    2^{j/count} so distinct points of an oscillating fixture are sampled.

    Args:
        spec: Grid the points must lie in
        count: Number of sequences per endpoint
        margin: Distance in u kept from the grid ends

    Returns:
        Points labeled 'zero' followed by points labeled 'infinity'
    """
    points: List[FiberPoint] = []
    for label, bound in (("zero", -spec.u_min), ("infinity", spec.u_max - spec.h)):
        limit = bound - margin
        if limit <= 1.0:
            raise InvalidInputError(f"grid too small for fiber sampling toward {label}")
        for j in range(count):
            scale = 2.0 ** (j / count)
            k = int(np.floor(np.log2(limit / scale)))
            u = scale * 2.0**k
            points.append(FiberPoint(label=label, t=float(np.exp(-u if label == "zero" else u)), index=j))
    return points


@dataclass(frozen=True, eq=False)
class FiberRow:
    """Values a(xi, x) of a symbol on a fiber, sampled on the x-grid."""

    label: FiberLabel
    t: float
    values: np.ndarray
    index: int = 0

    def matches(self, other: "FiberRow") -> bool:
        return (
            self.label == other.label
            and self.index == other.index
            and bool(np.isclose(self.t, other.t, rtol=1e-12))
        )


# -- bivariate symbols --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BivariateSymbol:
    """Sampled PDO symbol a(t, x) with boundary columns and fiber rows."""

    spec: GridSpec
    values: np.ndarray
    boundary_minus: np.ndarray
    boundary_plus: np.ndarray
    fibers: Tuple[FiberRow, ...] = ()
    name: str = "symbol"
    func: Optional[RowEvaluator] = field(default=None, repr=False, compare=False)
    flags: np.ndarray = field(default=None, repr=False, compare=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        n_t, n_x = self.spec.n_t, self.spec.n_x
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (n_t, n_x):
            raise InvalidInputError(f"symbol shape must be {(n_t, n_x)}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError(f"symbol '{self.name}' has non-finite samples")
        object.__setattr__(self, "values", values)
        for attr in ("boundary_minus", "boundary_plus"):
            column = np.broadcast_to(np.asarray(getattr(self, attr), dtype=complex), (n_t,))
            object.__setattr__(self, attr, column.copy())
        flags = np.zeros(n_t, dtype=bool) if self.flags is None else np.asarray(self.flags, bool)
        object.__setattr__(self, "flags", flags)
        object.__setattr__(self, "fibers", tuple(self.fibers))

    def sample(self, x: np.ndarray) -> np.ndarray:
        """Evaluate all t-rows at arbitrary frequencies, shape (n_t, len(x))."""
        x = np.asarray(x, dtype=float)
        if self.func is not None:
            return np.asarray(self.func(x), dtype=complex)
        grid_x = self.spec.x
        out = np.empty((self.spec.n_t, len(x)), dtype=complex)
        for i in range(self.spec.n_t):
            bm, bp = self.boundary_minus[i], self.boundary_plus[i]
            row = self.values[i]
            out[i] = np.interp(x, grid_x, row.real, bm.real, bp.real) + 1j * np.interp(
                x, grid_x, row.imag, bm.imag, bp.imag
            )
        return out

    @cached_property
    def row_v_norms(self) -> np.ndarray:
        """V(R)-norm of every t-row."""
        v = self.values
        sup = np.maximum(
            np.max(np.abs(v), axis=1),
            np.maximum(np.abs(self.boundary_minus), np.abs(self.boundary_plus)),
        )
        var = (
            np.sum(np.abs(np.diff(v, axis=1)), axis=1)
            + np.abs(v[:, 0] - self.boundary_minus)
            + np.abs(self.boundary_plus - v[:, -1])
        )
        return sup + var

    @cached_property
    def sup_v_norm(self) -> float:
        return float(np.max(self.row_v_norms))

    def fiber(self, label: FiberLabel, index: int = 0) -> FiberRow:
        for row in self.fibers:
            if row.label == label and row.index == index:
                return row
        raise InvalidInputError(f"symbol '{self.name}' has no fiber row ({label}, {index})")


def bivariate_from_function(
    spec: GridSpec,
    func: RowEvaluator,
    boundary_minus,
    boundary_plus,
    fibers=(),
    name: str = "symbol",
    flags: Optional[np.ndarray] = None,
) -> BivariateSymbol:
    """Sample a row evaluator on the x-grid and wrap it as a BivariateSymbol."""
    return BivariateSymbol(
        spec=spec,
        values=func(spec.x),
        boundary_minus=boundary_minus,
        boundary_plus=boundary_plus,
        fibers=tuple(fibers),
        name=name,
        func=func,
        flags=flags,
    )


def cached_rows(func: RowEvaluator, size: int = 2) -> RowEvaluator:
    """
    Remember the last ``size`` evaluations of a row evaluator.

    Symbols built from series are evaluated on the x-grid and on the FFT
    frequencies several times; the returned arrays are shared and must not
    be modified in place.
    """
    store: "OrderedDict[bytes, np.ndarray]" = OrderedDict()

    def evaluate(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        key = x.tobytes()
        if key in store:
            store.move_to_end(key)
            return store[key]
        rows = np.asarray(func(x), dtype=complex)
        store[key] = rows
        if len(store) > size:
            store.popitem(last=False)
        return rows

    return evaluate


def from_multiplier(a: MultiplierSymbol) -> BivariateSymbol:
    """The t-independent symbol a(t, x) = a(x)."""
    spec = a.spec
    func = lambda x: np.broadcast_to(a.evaluate(x), (spec.n_t, len(x))).copy()  # noqa: E731
    fibers = [FiberRow(pt.label, pt.t, a.values.copy(), pt.index) for pt in fiber_points(spec)]
    return bivariate_from_function(spec, func, a.limit_minus, a.limit_plus, fibers, a.name)


def from_t_function(spec: GridSpec, g: Callable[[np.ndarray], np.ndarray], name: str) -> BivariateSymbol:
    """The x-independent symbol a(t, x) = g(t)."""
    column = np.asarray(g(spec.t), dtype=complex)
    func = lambda x: np.repeat(column[:, None], len(x), axis=1)  # noqa: E731
    fibers = [
        FiberRow(pt.label, pt.t, np.full(spec.n_x, complex(g(np.array([pt.t]))[0])), pt.index)
        for pt in fiber_points(spec)
    ]
    return bivariate_from_function(spec, func, column, column, fibers, name)


def symbol_algebra(
    a: BivariateSymbol, b: BivariateSymbol, op: Literal["add", "mul"]
) -> BivariateSymbol:
    """
    Pointwise sum or product of two bivariate symbols.

    Values, boundary columns and matching fiber rows are all combined; fiber
    rows present in only one operand are dropped.

    Raises:
        InvalidInputError: If the grids differ or op is unknown
    """
    if a.spec != b.spec:
        raise InvalidInputError("symbols live on different grids")
    fn = _BINARY_OPS.get(op)
    if fn is None:
        raise InvalidInputError(f"Unknown symbol operation: {op}. Available: {list(_BINARY_OPS)}")
    fibers = []
    for fa in a.fibers:
        for fb in b.fibers:
            if fa.matches(fb):
                fibers.append(FiberRow(fa.label, fa.t, fn(fa.values, fb.values), fa.index))
                break
    func = None
    if a.func is not None and b.func is not None:
        ga, gb = a.func, b.func
        func = lambda x: fn(ga(x), gb(x))  # noqa: E731
    return BivariateSymbol(
        spec=a.spec,
        values=fn(a.values, b.values),
        boundary_minus=fn(a.boundary_minus, b.boundary_minus),
        boundary_plus=fn(a.boundary_plus, b.boundary_plus),
        fibers=tuple(fibers),
        name=f"({a.name} {op} {b.name})",
        func=func,
        flags=a.flags | b.flags,
    )


# -- membership diagnostics -----------------------------------------------------------


@dataclass
class ETildeReport:
    """Measured decay curves behind an E-tilde membership verdict."""

    symbol: str
    tail_m: np.ndarray
    tail_curve: np.ndarray
    so_moduli: List[Tuple[str, float, float]]
    shift_h: np.ndarray
    translation_curve: np.ndarray
    verdicts: Dict[str, bool]
    thresholds: Dict[str, float]

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())


def _tail_variation(a: BivariateSymbol, m: float) -> float:
    x = a.spec.x
    v = a.values
    d = np.abs(np.diff(v, axis=1))
    right = (x[:-1] >= m) & (x[1:] > m)
    left = (x[1:] <= -m) & (x[:-1] < -m)
    total = np.sum(d[:, right | left], axis=1)
    total = total + np.abs(v[:, 0] - a.boundary_minus) + np.abs(a.boundary_plus - v[:, -1])
    return float(np.max(total))


def _so_modulus(a: BivariateSymbol, u_lo: float) -> Optional[float]:
    """Oscillation over [u_lo, u_lo + ln 2] among unflagged rows, None if too few remain."""
    u = a.spec.u
    rows = a.values[(u >= u_lo) & (u <= u_lo + np.log(2.0) + 1e-12) & ~a.flags]
    if len(rows) < 2:
        return None
    diff = np.abs(rows[:, None, :] - rows[None, :, :])
    return float(np.max(diff))


def _translation_modulus(a: BivariateSymbol, k: int) -> float:
    d = a.values[:, k:] - a.values[:, :-k]
    sup = np.max(np.abs(d), axis=1)
    var = np.sum(np.abs(np.diff(d, axis=1)), axis=1)
    return float(np.max(sup + var))


def check_E_tilde(
    a: BivariateSymbol,
    tail_tol: float = 1e-6,
    so_tol: float = 1e-2,
    tail_fraction: float = 0.75,
) -> ETildeReport:
    """
    Measure the three diagnostics behind membership in E-tilde(R+, V(R)).

    (i) the tail-variation curve m -> sup_t var_{|x|>m} a(t, .);
    (ii) slow-oscillation moduli cm_r over [r, 2r] for dyadic r toward both
    grid ends, leaving out rows flagged as truncated; (iii) the x-translation
    modulus sup_t ||a(t,.+h) - a(t,.)||_V as h shrinks to one grid step.

    Args:
        a: Symbol to examine
        tail_tol: Bound for the tail variation at m = tail_fraction * x_max
        so_tol: Bound for the outermost slow-oscillation modulus at each end
        tail_fraction: Where on the x-axis the tail verdict is taken

    Returns:
        Report with curves, per-diagnostic verdicts and thresholds used
    """
    spec = a.spec
    m_grid = np.linspace(0.0, spec.x_max, 21)[:-1]
    tail_curve = np.array([_tail_variation(a, m) for m in m_grid])
    tail_value = _tail_variation(a, tail_fraction * spec.x_max)

    span = np.log(2.0)
    last = spec.u_max - spec.h
    starts: List[Tuple[str, float]] = []
    k = 0
    while -(2.0**k) >= spec.u_min or 2.0**k + span <= last:
        if -(2.0**k) >= spec.u_min:
            starts.append(("zero", -(2.0**k)))
        if 2.0**k + span <= last:
            starts.append(("infinity", 2.0**k))
        k += 1
    # intervals flush with the grid ends come last so they decide the verdict
    starts += [("zero", spec.u_min), ("infinity", last - span)]

    so: List[Tuple[str, float, float]] = []
    for end, lo in starts:
        value = _so_modulus(a, lo)
        if value is not None:
            so.append((end, float(np.exp(lo)), value))
    outer = {}
    for end, _, value in so:
        outer[end] = value
    so_ok = all(value <= so_tol for value in outer.values())

    shifts = np.array([8, 4, 2, 1])
    translation = np.array([_translation_modulus(a, int(s)) for s in shifts])
    translation_ok = bool(translation[-1] <= 0.5 * translation[0] + 1e-12)

    verdicts = {
        "tail_variation": bool(tail_value <= tail_tol),
        "slow_oscillation": bool(so_ok),
        "translation": translation_ok,
    }
    if not all(verdicts.values()):
        logger.info("symbol %s fails E-tilde diagnostics: %s", a.name, verdicts)
    return ETildeReport(
        symbol=a.name,
        tail_m=m_grid,
        tail_curve=tail_curve,
        so_moduli=so,
        shift_h=shifts * spec.dx,
        translation_curve=translation,
        verdicts=verdicts,
        thresholds={"tail_tol": tail_tol, "so_tol": so_tol, "tail_m": tail_fraction * spec.x_max},
    )
