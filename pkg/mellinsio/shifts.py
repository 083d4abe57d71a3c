"""
Slowly oscillating functions, slowly oscillating shifts and weighted shift operators.

A shift is stored through its log displacement omega, so that
alpha(t) = t exp(omega(t)). Fixtures are written in u = ln t, where slow
oscillation at 0 and infinity means the derivative in u vanishes at both
ends of the line.
"""

from __future__ import annotations

import logging
from math import comb
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional

import numpy as np
from scipy import sparse

from .errors import DomainError, InvalidInputError, NumericalError, PreconditionError
from .grid import GridFunction, GridSpec, from_weighted, l2_norm, weighted_samples
from .operators import DenseOperator, identity
from .symbols import FiberPoint

logger = logging.getLogger(__name__)

SOKind = Literal["constant", "convergent", "oscillating"]
Direction = Literal[1, -1]

MAX_ITERATE = 64
NEWTON_MAX_ITER = 100
NEWTON_TOL = 1e-13
MAX_DISPLACEMENT = 2.0
INTERP_NODES = 8


# -- slowly oscillating functions ---------------------------------------------------


@dataclass(frozen=True)
class SOFunction:
    """
    Real slowly oscillating function written in log coordinates.

    Kinds:
        constant:     level
        convergent:   level + amplitude * tanh((u - center) / width)
        oscillating:  level + amplitude * sin(frequency * ln(1 + u^2) + phase)
    """

    kind: SOKind = "constant"
    level: float = 0.0
    amplitude: float = 0.0
    frequency: float = 1.0
    phase: float = 0.0
    width: float = 1.0
    center: float = 0.0
    name: str = "so"

    def __post_init__(self) -> None:
        if self.kind not in ("constant", "convergent", "oscillating"):
            raise InvalidInputError(
                f"Unknown fixture kind: {self.kind}. Available: ['constant', 'convergent', 'oscillating']"
            )
        if self.kind == "convergent" and not self.width > 0:
            raise InvalidInputError(f"convergent fixture '{self.name}' needs a positive width")

    def of_u(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.kind == "constant":
            return np.full_like(u, self.level)
        if self.kind == "convergent":
            return self.level + self.amplitude * np.tanh((u - self.center) / self.width)
        return self.level + self.amplitude * np.sin(self.frequency * np.log1p(u * u) + self.phase)

    def derivative_u(self, u: np.ndarray) -> np.ndarray:
        """d/du of the fixture, i.e. t times its t-derivative."""
        u = np.asarray(u, dtype=float)
        if self.kind == "constant":
            return np.zeros_like(u)
        if self.kind == "convergent":
            return self.amplitude / self.width / np.cosh((u - self.center) / self.width) ** 2
        arg = self.frequency * np.log1p(u * u) + self.phase
        return self.amplitude * np.cos(arg) * self.frequency * 2.0 * u / (1.0 + u * u)

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return self.of_u(np.log(np.asarray(t, dtype=float)))

    @property
    def sup(self) -> float:
        """Exact sup |f| over R+."""
        return abs(self.level) + abs(self.amplitude)

    @property
    def converges(self) -> bool:
        return self.kind != "oscillating" or self.amplitude == 0.0

    def limit(self, label: str) -> float:
        """Limit at 0 ('zero') or infinity ('infinity') of a convergent fixture."""
        if not self.converges:
            raise DomainError(f"fixture '{self.name}' oscillates and has no limit at {label}")
        if self.kind == "convergent":
            return self.level - self.amplitude if label == "zero" else self.level + self.amplitude
        return self.level

    def fiber_value(self, point: FiberPoint) -> float:
        """Exact limit for convergent fixtures, point value otherwise."""
        if self.converges:
            return self.limit(point.label)
        return float(self(np.array([point.t]))[0])

    def oscillation_modulus(self, u: float, samples: int = 64) -> float:
        """sup |f(t) - f(tau)| for ln t, ln tau in [u - ln 2, u]."""
        values = self.of_u(np.linspace(u - np.log(2.0), u, samples))
        return float(np.max(values) - np.min(values))


# -- shifts -----------------------------------------------------------------------


def _log_positive(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("shifts are defined on R+ only, got a non-positive point")
    return np.log(t)


@dataclass(frozen=True)
class SOShift:
    """Orientation-preserving diffeomorphism alpha(t) = t exp(omega(t)) of R+."""

    omega: SOFunction
    name: str = "alpha"
    check_span: float = 64.0

    def __post_init__(self) -> None:
        u = np.linspace(-self.check_span, self.check_span, 8193)
        slope = 1.0 + self.omega.derivative_u(u)
        if np.min(slope) <= 0:
            raise DomainError(f"shift '{self.name}' is not increasing (min 1 + omega' = {np.min(slope):.3g})")
        if self.omega.sup > MAX_DISPLACEMENT:
            raise DomainError(
                f"shift '{self.name}' displaces by up to {self.omega.sup:.3g} in log scale "
                f"(limit {MAX_DISPLACEMENT})"
            )
        disp = self.omega.of_u(u)
        if np.any(disp > 0) and np.any(disp < 0):
            raise DomainError(f"shift '{self.name}' has a fixed point inside R+")

    @property
    def identity_map(self) -> bool:
        return self.omega.kind == "constant" and self.omega.level == 0.0

    def forward_u(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return u + self.omega.of_u(u)

    def inverse_u(self, s: np.ndarray) -> np.ndarray:
        """
        Solve v + omega(v) = s by Newton's method safeguarded by bisection.

        Raises:
            NumericalError: If some point fails to converge
        """
        s = np.atleast_1d(np.asarray(s, dtype=float))
        bound = self.omega.sup
        lo, hi = s - bound - 1e-12, s + bound + 1e-12
        v = s - self.omega.of_u(s)
        for _ in range(NEWTON_MAX_ITER):
            resid = self.forward_u(v) - s
            if np.all(np.abs(resid) <= NEWTON_TOL + 8.0 * np.finfo(float).eps * np.abs(s)):
                return v
            hi = np.where(resid > 0, v, hi)
            lo = np.where(resid < 0, v, lo)
            step = v - resid / (1.0 + self.omega.derivative_u(v))
            outside = (step <= lo) | (step >= hi)
            v = np.where(outside, 0.5 * (lo + hi), step)
        resid = np.abs(self.forward_u(v) - s)
        raise NumericalError(
            f"inverse of shift '{self.name}' did not converge (residual {np.max(resid):.2e})"
        )

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return np.exp(self.forward_u(_log_positive(t)))

    def inverse(self, t: np.ndarray) -> np.ndarray:
        return np.exp(self.inverse_u(_log_positive(t)))

    def displacement(self, u: np.ndarray, direction: Direction = 1) -> np.ndarray:
        """ln(alpha_eps(t) / t) as a function of u = ln t."""
        u = np.asarray(u, dtype=float)
        if direction == 1:
            return self.omega.of_u(u)
        return self.inverse_u(u) - u

    def jacobian(self, u: np.ndarray, direction: Direction = 1) -> np.ndarray:
        """t alpha_eps'(t) / alpha_eps(t), the log-derivative of the shift."""
        u = np.asarray(u, dtype=float)
        if direction == 1:
            return 1.0 + self.omega.derivative_u(u)
        return 1.0 / (1.0 + self.omega.derivative_u(self.inverse_u(u)))

    def fiber_displacement(self, point: FiberPoint, direction: Direction = 1) -> float:
        value = self.omega.fiber_value(point)
        return value if direction == 1 else -value


def _check_direction(direction: int) -> Direction:
    if direction not in (1, -1):
        raise InvalidInputError(f"Unknown direction: {direction}. Available: [1, -1]")
    return direction  # type: ignore[return-value]


def shift_apply(s: SOShift, t: np.ndarray) -> np.ndarray:
    """alpha(t)."""
    return s(t)


def shift_inverse(s: SOShift, t: np.ndarray) -> np.ndarray:
    """alpha_{-1}(t), accurate to about 1e-13 relative."""
    return s.inverse(t)


@dataclass(frozen=True)
class ShiftIterate:
    """The k-th iterate alpha_k of a shift (alpha_0 = identity)."""

    shift: SOShift
    k: int

    def u_map(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        step = self.shift.forward_u if self.k >= 0 else self.shift.inverse_u
        for _ in range(abs(self.k)):
            u = step(u)
        return u

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return np.exp(self.u_map(np.log(np.asarray(t, dtype=float))))

    def log_derivative(self, t: np.ndarray) -> np.ndarray:
        """t alpha_k'(t) / alpha_k(t), by the chain rule along the orbit."""
        u = np.log(np.asarray(t, dtype=float))
        direction: Direction = 1 if self.k >= 0 else -1
        out = np.ones_like(u)
        for _ in range(abs(self.k)):
            out = out * self.shift.jacobian(u, direction)
            u = self.shift.forward_u(u) if direction == 1 else self.shift.inverse_u(u)
        return out

    def range_warnings(self, grid: GridSpec) -> List[str]:
        """Messages for grid nodes whose image leaves the log grid."""
        images = self.u_map(grid.u)
        outside = int(np.sum((images < grid.u[0]) | (images > grid.u[-1])))
        if outside == 0:
            return []
        return [f"alpha_{self.k} maps {outside} of {grid.n_t} nodes outside the log grid"]


def shift_iterate(s: SOShift, k: int, max_iterate: int = MAX_ITERATE) -> ShiftIterate:
    """
    Build alpha_k.

    Raises:
        DomainError: If |k| exceeds max_iterate
    """
    if abs(k) > max_iterate:
        raise DomainError(f"iterate {k} exceeds the limit of {max_iterate}")
    return ShiftIterate(s, int(k))


# -- shift operators --------------------------------------------------------------


def _barycentric_weights() -> np.ndarray:
    return np.array([(-1.0) ** k * comb(INTERP_NODES - 1, k) for k in range(INTERP_NODES)])


def interpolation_stencil(grid: GridSpec, points: np.ndarray):
    """
    Eight-node barycentric interpolation on the uniform log grid.

    Stencils are clipped to the grid, so they become one-sided near the ends.

    Returns:
        (start, weights) with weights of shape (len(points), 8)
    """
    n = grid.n_t
    pos = (np.asarray(points, dtype=float) - grid.u[0]) / grid.h
    start = np.clip(np.floor(pos).astype(int) - INTERP_NODES // 2 + 1, 0, n - INTERP_NODES)
    offsets = pos[:, None] - (start[:, None] + np.arange(INTERP_NODES)[None, :])
    exact = np.abs(offsets) < 1e-12
    hit = np.any(exact, axis=1)
    # rows that land on a node are replaced by a unit weight below
    safe = np.where(hit[:, None], 1.0, offsets)
    terms = _barycentric_weights()[None, :] / safe
    weights = terms / np.sum(terms, axis=1, keepdims=True)
    weights[hit] = exact[hit].astype(float)
    return start, weights


def _shift_rows(s: SOShift, grid: GridSpec, direction: Direction):
    u = grid.u
    images = u + s.displacement(u, direction)
    flags = (images < u[0]) | (images > u[-1])
    start, weights = interpolation_stencil(grid, np.clip(images, u[0], u[-1]))
    scale = s.jacobian(u, direction) ** (1.0 / grid.p)
    weights = weights * scale[:, None]
    weights[flags] = 0.0
    return start, weights, flags


def shift_flags(s: SOShift, grid: GridSpec, direction: int = 1) -> np.ndarray:
    """Nodes whose image under the shift leaves the log grid."""
    return _shift_rows(s, grid, _check_direction(direction))[2]


def shift_sparse(s: SOShift, grid: GridSpec, direction: int = 1) -> sparse.csr_matrix:
    """The weighted shift matrix in CSR form, eight entries per row."""
    direction = _check_direction(direction)
    start, weights, _ = _shift_rows(s, grid, direction)
    n = grid.n_t
    rows = np.repeat(np.arange(n), INTERP_NODES)
    cols = (start[:, None] + np.arange(INTERP_NODES)[None, :]).ravel()
    return sparse.csr_matrix((weights.ravel(), (rows, cols)), shape=(n, n))


def shift_operator(s: SOShift, grid: GridSpec, direction: int = 1) -> DenseOperator:
    """
    Matrix of Phi^{-1} U_alpha Phi with (U f)(t) = (alpha'(t))^{1/p} f(alpha(t)).

    In weighted log coordinates this is f~(u) -> Omega(u)^{1/p} f~(u + omega(u)),
    where Omega is the log-derivative. Rows whose image leaves the log grid
    are zeroed and flagged. ``direction=-1`` builds U_alpha^{-1}.
    """
    direction = _check_direction(direction)
    if s.identity_map:
        return DenseOperator(identity(grid).matrix, grid, f"U_{s.name}")
    start, weights, flags = _shift_rows(s, grid, direction)
    n = grid.n_t
    matrix = np.zeros((n, n), dtype=complex)
    cols = start[:, None] + np.arange(INTERP_NODES)[None, :]
    matrix[np.arange(n)[:, None], cols] = weights
    if np.any(flags):
        logger.debug("shift '%s': %d rows leave the log grid", s.name, int(np.sum(flags)))
    label = f"U_{s.name}" if direction == 1 else f"U_{s.name}^-1"
    return DenseOperator(matrix, grid, label, flags)


# -- Neumann series ---------------------------------------------------------------


def contraction_factor(
    v: SOFunction, s: SOShift, grid: GridSpec, direction: int = 1, mu: float = 1.0
) -> Dict[str, float]:
    """
    Contraction factors of mu v U_alpha on the grid.

    Returns:
        ``declared`` = sup |mu v| Omega^{1/p} over the grid and ``effective``,
        the factor sup |mu v| Omega^{1/p - 1/2} that bounds the discrete
        operator in the l2 norm of weighted samples
    """
    direction = _check_direction(direction)
    u = grid.u
    coeff = np.abs(mu * v.of_u(u))
    jac = s.jacobian(u, direction)
    return {
        "declared": float(np.max(coeff * jac ** (1.0 / grid.p))),
        "effective": float(np.max(coeff * jac ** (1.0 / grid.p - 0.5))),
    }


def _terms_needed(q: float, norm: float, tol: float) -> int:
    if q == 0.0 or norm == 0.0:
        return 0
    n = 0
    while q ** (n + 1) / (1.0 - q) * norm > tol:
        n += 1
    return n


@dataclass
class NeumannResult:
    """Outcome of summing (I - v U)^{-1} f by its Neumann series."""

    result: GridFunction
    n_terms: int
    q_effective: float
    q_declared: float
    tail_bound: float
    residual: float
    flags: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]


def _require_contraction(factors: Dict[str, float], what: str) -> float:
    q = factors["effective"]
    if q >= 1.0:
        raise PreconditionError(f"{what}: contraction factor {q:.4g} is not below 1")
    return q


def neumann_apply(
    v: SOFunction,
    s: SOShift,
    f: GridFunction,
    tol: float = 1e-8,
    mu: float = 1.0,
    direction: int = 1,
) -> NeumannResult:
    """
    Compute (I - mu v U_alpha)^{-1} f by the Neumann series.

    The number of terms N is the smallest with q^{N+1}/(1-q) ||f|| <= tol.

    Raises:
        PreconditionError: If the measured contraction factor is not below 1
    """
    direction = _check_direction(direction)
    grid = f.spec
    factors = contraction_factor(v, s, grid, direction, mu)
    q = _require_contraction(factors, "neumann_apply")
    shift = shift_sparse(s, grid, direction)
    coeff = mu * v.of_u(grid.u)
    g = weighted_samples(f)
    norm_f = l2_norm(grid, g)
    n_terms = _terms_needed(q, norm_f, tol)
    total = g.copy()
    term = g
    for _ in range(n_terms):
        term = coeff * (shift @ term)
        total = total + term
        if not np.any(term):
            break
    residual = l2_norm(grid, total - coeff * (shift @ total) - g)
    tail = q ** (n_terms + 1) / (1.0 - q) * norm_f if q > 0 else 0.0
    _, _, flags = _shift_rows(s, grid, direction)
    logger.debug("neumann_apply: q=%.4g, %d terms, residual %.2e", q, n_terms, residual)
    return NeumannResult(
        result=from_weighted(grid, total),
        n_terms=n_terms,
        q_effective=q,
        q_declared=factors["declared"],
        tail_bound=tail,
        residual=residual,
        flags=flags,
    )


def neumann_matrix(
    v: SOFunction,
    s: SOShift,
    grid: GridSpec,
    rhs: np.ndarray,
    tol: float = 1e-10,
    mu: float = 1.0,
    direction: int = 1,
    max_terms: Optional[int] = None,
) -> np.ndarray:
    """
    (I - mu v U_alpha)^{-1} applied to the columns of rhs by the truncated Neumann series.

    The term count is the one of ``neumann_operator``, so the result equals
    that matrix times rhs while every term stays a sparse-dense product.

    Raises:
        PreconditionError: If the measured contraction factor is not below 1
    """
    direction = _check_direction(direction)
    factors = contraction_factor(v, s, grid, direction, mu)
    q = _require_contraction(factors, "neumann_operator")
    step = sparse.diags(mu * v.of_u(grid.u)) @ shift_sparse(s, grid, direction)
    n_terms = _terms_needed(q, 1.0, tol)
    if max_terms is not None:
        n_terms = min(n_terms, max_terms)
    term = np.array(rhs, dtype=complex)
    total = term.copy()
    for _ in range(n_terms):
        term = step @ term
        total += term
        if not np.any(term):
            break
    return total


def neumann_operator(
    v: SOFunction,
    s: SOShift,
    grid: GridSpec,
    tol: float = 1e-10,
    mu: float = 1.0,
    direction: int = 1,
    max_terms: Optional[int] = None,
) -> DenseOperator:
    """
    Matrix of (I - mu v U_alpha)^{-1} by the truncated Neumann series.

    The shift is kept sparse while the powers accumulate.
    """
    eye = np.eye(grid.n_t, dtype=complex)
    total = neumann_matrix(v, s, grid, eye, tol, mu, direction, max_terms)
    _, _, flags = _shift_rows(s, grid, direction)
    return DenseOperator(total, grid, f"(I-{mu:g}{v.name}U_{s.name})^-1", flags)


def drift_along_shift(c: SOFunction, s: SOShift, points: List[FiberPoint]) -> List[float]:
    """|c(alpha(t)) - c(t)| at the given points; tends to zero for SO c and alpha."""
    t = np.array([pt.t for pt in points])
    return [float(x) for x in np.abs(c(s(t)) - c(t))]

