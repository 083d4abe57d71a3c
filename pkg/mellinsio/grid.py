"""
Logarithmic grid over the half-line and the Mellin transform.

Points of R+ are handled in log coordinates u = ln t on a uniform periodic
grid. The isomorphism E (f -> f(e^u)) and the weight Phi (f -> t^{1/p} f)
are cheap reindexing/multiplication; the Mellin transform is the Fourier
transform in u evaluated on the configured frequency grid.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator
from scipy import fft as sp_fft

from .errors import ConfigurationError, InvalidInputError

logger = logging.getLogger(__name__)


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


class GridSpec(BaseModel):
    """Discretization of R+ in log coordinates plus the Mellin frequency grid."""

    u_min: float = -16.0
    u_max: float = 16.0
    n_t: int = 2048
    x_max: float = 20.0
    n_x: int = 1024
    p: float = 2.0

    model_config = ConfigDict(extra="forbid", frozen=True)

    @field_validator("n_t", "n_x")
    @classmethod
    def _check_size(cls, value: int) -> int:
        if value < 8 or not _is_power_of_two(value):
            raise ValueError(f"grid sizes must be powers of two >= 8, got {value}")
        return value

    @field_validator("x_max")
    @classmethod
    def _check_x_max(cls, value: float) -> float:
        if not value > 0:
            raise ValueError(f"x_max must be positive, got {value}")
        return value

    @field_validator("p")
    @classmethod
    def _check_p(cls, value: float) -> float:
        if not (1.0 < value < np.inf):
            raise ValueError(f"p must lie in (1, inf), got {value}")
        return value

    @model_validator(mode="after")
    def _check_bounds(self) -> "GridSpec":
        if not self.u_min < self.u_max:
            raise ValueError(f"u_min ({self.u_min}) must be below u_max ({self.u_max})")
        return self

    @property
    def h(self) -> float:
        """Log-grid spacing; the grid is periodic so u_max itself is excluded."""
        return (self.u_max - self.u_min) / self.n_t

    @property
    def u(self) -> np.ndarray:
        return self.u_min + self.h * np.arange(self.n_t)

    @property
    def t(self) -> np.ndarray:
        return np.exp(self.u)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-self.x_max, self.x_max, self.n_x)

    @property
    def dx(self) -> float:
        return 2.0 * self.x_max / (self.n_x - 1)

    @property
    def x_weights(self) -> np.ndarray:
        """Trapezoid weights on the x-grid."""
        w = np.full(self.n_x, self.dx)
        w[0] = w[-1] = 0.5 * self.dx
        return w

    @property
    def xi(self) -> np.ndarray:
        """FFT frequencies of the periodic log grid, used for operator assembly."""
        return 2.0 * np.pi * sp_fft.fftfreq(self.n_t, d=self.h)

    @property
    def length(self) -> float:
        return self.u_max - self.u_min

    def interior_mask(self) -> np.ndarray:
        """Nodes in the middle half of the log grid."""
        quarter = 0.25 * self.length
        u = self.u
        return (u >= self.u_min + quarter) & (u <= self.u_max - quarter)

    def grid_hash(self) -> str:
        payload = json.dumps(self.model_dump(), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex samples of a function on the t-nodes of a grid."""

    spec: GridSpec
    samples: np.ndarray

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=complex)
        if samples.shape != (self.spec.n_t,):
            raise InvalidInputError(
                f"expected {self.spec.n_t} samples, got shape {samples.shape}"
            )
        if not np.all(np.isfinite(samples)):
            raise InvalidInputError("grid function contains non-finite samples")
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_callable(cls, spec: GridSpec, fn) -> "GridFunction":
        return cls(spec, np.asarray(fn(spec.t), dtype=complex))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _require_same_grid(self.spec, other.spec)
        return GridFunction(self.spec, self.samples + other.samples)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _require_same_grid(self.spec, other.spec)
        return GridFunction(self.spec, self.samples - other.samples)

    def scale(self, factor: complex) -> "GridFunction":
        return GridFunction(self.spec, factor * self.samples)


@dataclass(frozen=True, eq=False)
class LogSamples:
    """Samples g_j = f(e^{u_j}) at the log nodes."""

    spec: GridSpec
    u: np.ndarray
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class MellinSpectrum:
    """Mellin transform sampled on the x-grid."""

    spec: GridSpec
    values: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.spec.n_x,):
            raise InvalidInputError(
                f"expected {self.spec.n_x} spectral samples, got shape {values.shape}"
            )
        object.__setattr__(self, "values", values)


def _require_same_grid(a: GridSpec, b: GridSpec) -> None:
    if a != b:
        raise InvalidInputError("operands live on different grids")


def _require_powers_of_two(spec: GridSpec) -> None:
    # model_construct can bypass validation
    if not (_is_power_of_two(spec.n_t) and _is_power_of_two(spec.n_x)):
        raise ConfigurationError(
            f"grid sizes must be powers of two (n_t={spec.n_t}, n_x={spec.n_x})"
        )


def to_log(f: GridFunction) -> LogSamples:
    """
    Apply E: return g(u_j) = f(e^{u_j}).

    Args:
        f: Function sampled on the t-nodes

    Returns:
        Log-coordinate samples on the same grid
    """
    return LogSamples(spec=f.spec, u=f.spec.u, values=f.samples.copy())


def from_log(g: LogSamples) -> GridFunction:
    """Inverse of to_log."""
    if len(g.values) != g.spec.n_t:
        raise InvalidInputError(f"expected {g.spec.n_t} log samples, got {len(g.values)}")
    return GridFunction(g.spec, np.asarray(g.values, dtype=complex))


def phi_weight(
    f: GridFunction, direction: Literal["forward", "inverse"] = "forward"
) -> GridFunction:
    """
    Apply Phi (multiply by t^{1/p}) or its inverse.

    Args:
        f: Function on the grid
        direction: 'forward' multiplies, 'inverse' divides

    Returns:
        Weighted function on the same grid
    """
    weight = f.spec.t ** (1.0 / f.spec.p)
    if direction == "forward":
        return GridFunction(f.spec, f.samples * weight)
    if direction == "inverse":
        return GridFunction(f.spec, f.samples / weight)
    raise InvalidInputError(f"Unknown direction: {direction}. Available: ['forward', 'inverse']")


def weighted_samples(f: GridFunction) -> np.ndarray:
    """Samples of E Phi f, the coordinates operators act on."""
    return f.samples * f.spec.t ** (1.0 / f.spec.p)


def from_weighted(spec: GridSpec, values: np.ndarray) -> GridFunction:
    """Inverse of weighted_samples."""
    return GridFunction(spec, np.asarray(values, dtype=complex) / spec.t ** (1.0 / spec.p))


def l2_norm(spec: GridSpec, values: np.ndarray) -> float:
    """Discrete L2(du) norm of log-coordinate samples."""
    return float(np.sqrt(spec.h * np.sum(np.abs(values) ** 2)))


def lp_norm(f: GridFunction) -> float:
    """Discrete L^p(R+, dt) norm, computed as the L^p(du) norm of E Phi f."""
    p = f.spec.p
    return float((f.spec.h * np.sum(np.abs(weighted_samples(f)) ** p)) ** (1.0 / p))


def _tail_ratio(values: np.ndarray) -> float:
    peak = np.max(np.abs(values))
    if peak == 0:
        return 0.0
    edge = max(1, len(values) // 64)
    tail = max(np.max(np.abs(values[:edge])), np.max(np.abs(values[-edge:])))
    return float(tail / peak)


def mellin_forward(f: GridFunction, tail_threshold: float = 1e-8) -> MellinSpectrum:
    """
    Compute (Mf)(x_k) = integral of f(t) t^{-i x_k} dt/t.

    The integral is the Fourier integral of g = Ef in u, discretized by the
    trapezoid rule on the periodic log grid.

    Args:
        f: Function sampled on the t-nodes
        tail_threshold: Relative tail magnitude above which a truncation
            warning is recorded in the metadata

    Returns:
        Spectrum on the x-grid

    Raises:
        ConfigurationError: If the grid sizes are not powers of two
    """
    spec = f.spec
    _require_powers_of_two(spec)
    g = to_log(f).values
    kernel = np.exp(-1j * np.outer(spec.x, spec.u))
    values = spec.h * (kernel @ g)
    ratio = _tail_ratio(g)
    metadata: Dict[str, Any] = {"tail_ratio": ratio, "truncated": ratio > tail_threshold}
    if metadata["truncated"]:
        logger.warning("function does not decay at grid ends (tail ratio %.2e)", ratio)
    return MellinSpectrum(spec=spec, values=values, metadata=metadata)


def mellin_inverse(spectrum: MellinSpectrum) -> GridFunction:
    """
    Compute (M^{-1} G)(t_j) = (1/2pi) integral of G(x) t_j^{ix} dx on the x-grid.

    Raises:
        ConfigurationError: If the grid sizes are not powers of two
    """
    spec = spectrum.spec
    _require_powers_of_two(spec)
    kernel = np.exp(1j * np.outer(spec.u, spec.x))
    values = kernel @ (spec.x_weights * spectrum.values) / (2.0 * np.pi)
    return from_log(LogSamples(spec=spec, u=spec.u, values=values))
