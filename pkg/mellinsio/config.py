"""
Run configuration models for mellin-sio.

A run is described declaratively in YAML: the grid, the fixture catalog of
slowly oscillating functions and shifts, the pair (c, alpha, d, beta) fed to
the index suite, tolerances, and which checks each suite runs.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigurationError
from .grid import GridSpec
from .shifts import SOFunction, SOShift


class FixtureSpec(BaseModel):
    """A slowly oscillating function in log coordinates."""

    kind: Literal["constant", "convergent", "oscillating"] = "constant"
    level: float = 0.0
    amplitude: float = 0.0
    frequency: float = 1.0
    phase: float = 0.0
    width: float = 1.0
    center: float = 0.0

    model_config = ConfigDict(extra="forbid")


class ShiftSpec(BaseModel):
    """A shift alpha(t) = t exp(omega(t)) naming its displacement fixture."""

    omega: str

    model_config = ConfigDict(extra="forbid")


class PairSpec(BaseModel):
    """Coefficients and shifts of V = (I - c U_alpha) P^+ + (I - d U_beta) P^-."""

    c: str = "c"
    alpha: str = "alpha"
    d: str = "d"
    beta: str = "beta"
    epsilon1: Literal[1, -1] = 1
    epsilon2: Literal[1, -1] = 1

    model_config = ConfigDict(extra="forbid")


class BinomialSpec(BaseModel):
    """One binomial I - v U_gamma^epsilon used by the realization checks."""

    v: str
    gamma: str
    epsilon: Literal[1, -1] = 1

    model_config = ConfigDict(extra="forbid")


class Thresholds(BaseModel):
    """Every tolerance a check compares against."""

    transform_rel: float = 1e-6
    pv_rel: float = 1e-3
    algebra_pointwise: float = 1e-12
    algebra_operator: float = 1e-8
    realization: float = 1e-6
    neumann_series: float = 1e-6
    root_test: float = 0.95
    root_test_from: int = 10
    disk_slack: float = 1e-12
    fiber_factorization: float = 1e-10
    identity_at_zero: float = 1e-8
    scan_residual: float = 1e-2
    sv_ratio: float = 1e-3
    edge_response: float = 1e-2
    ellipticity: float = 1e-3
    eps_wind: float = 1e-3
    winding_residue: float = 0.1
    shift_identity: float = 1e-10
    shift_isometry: float = 1e-6
    shift_round_trip: float = 1e-8
    etilde_tail: float = 1e-6
    etilde_so: float = 1e-2
    kernel_eps: float = 1e-6

    model_config = ConfigDict(extra="forbid")


def _default_fixtures() -> Dict[str, FixtureSpec]:
    ramp = {"kind": "convergent", "amplitude": 0.02, "width": 16.0}
    return {
        "c": FixtureSpec(level=0.4, **ramp),
        "d": FixtureSpec(level=-0.3, **ramp),
        "omega_alpha": FixtureSpec(level=0.5, **ramp),
        "omega_beta": FixtureSpec(level=0.35, **ramp),
        "half": FixtureSpec(level=0.5),
        "log2": FixtureSpec(level=math.log(2.0)),
        "osc_c": FixtureSpec(kind="oscillating", level=0.3, amplitude=0.1, frequency=0.5),
        "osc_omega": FixtureSpec(kind="oscillating", level=0.4, amplitude=0.05, frequency=0.5),
    }


def _default_shifts() -> Dict[str, ShiftSpec]:
    return {
        "alpha": ShiftSpec(omega="omega_alpha"),
        "beta": ShiftSpec(omega="omega_beta"),
        "double": ShiftSpec(omega="log2"),
        "osc": ShiftSpec(omega="osc_omega"),
    }


def _default_binomials() -> List[BinomialSpec]:
    return [
        BinomialSpec(v="half", gamma="double"),
        BinomialSpec(v="osc_c", gamma="osc"),
        BinomialSpec(v="c", gamma="alpha", epsilon=-1),
    ]


class RunConfig(BaseModel):
    """Top-level run configuration."""

    version: str = "1"
    grid: GridSpec = Field(default_factory=GridSpec)
    seed: int = 0
    y_values: List[float] = Field(default_factory=lambda: [1.5, 2.0, 3.0])
    fixtures: Dict[str, FixtureSpec] = Field(default_factory=_default_fixtures)
    shifts: Dict[str, ShiftSpec] = Field(default_factory=_default_shifts)
    pair: PairSpec = Field(default_factory=PairSpec)
    binomials: List[BinomialSpec] = Field(default_factory=_default_binomials)
    thresholds: Thresholds = Field(default_factory=Thresholds)
    suites: Dict[Literal["identities", "pdo", "index"], Optional[List[str]]] = Field(
        default_factory=dict
    )
    homotopy_steps: int = Field(default=11, ge=2)
    series_tol: float = Field(default=1e-10, gt=0)
    max_iterate: int = Field(default=64, ge=1)
    edge_frequency: float = Field(default=8.0, gt=0)

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def _check_references(self) -> "RunConfig":
        for name, shift in self.shifts.items():
            if shift.omega not in self.fixtures:
                raise ValueError(f"shift '{name}' references unknown fixture '{shift.omega}'")
        pair = self.pair
        for fixture in (pair.c, pair.d):
            if fixture not in self.fixtures:
                raise ValueError(f"pair references unknown fixture '{fixture}'")
        for shift in (pair.alpha, pair.beta):
            if shift not in self.shifts:
                raise ValueError(f"pair references unknown shift '{shift}'")
        for b in self.binomials:
            if b.v not in self.fixtures or b.gamma not in self.shifts:
                raise ValueError(f"binomial ({b.v}, {b.gamma}) references an unknown name")
        return self

    def fixture(self, name: str) -> SOFunction:
        if name not in self.fixtures:
            raise ConfigurationError(f"Unknown fixture: {name}. Available: {list(self.fixtures)}")
        return SOFunction(name=name, **self.fixtures[name].model_dump())

    def shift(self, name: str) -> SOShift:
        if name not in self.shifts:
            raise ConfigurationError(f"Unknown shift: {name}. Available: {list(self.shifts)}")
        return SOShift(omega=self.fixture(self.shifts[name].omega), name=name)

    def suite_checks(self, suite: str) -> Optional[List[str]]:
        return self.suites.get(suite)  # type: ignore[call-overload]

    def with_overrides(self, grid_n: Optional[int] = None, seed: Optional[int] = None) -> "RunConfig":
        """Apply the --grid-n and --seed command line overrides."""
        data = self.model_dump()
        if grid_n is not None:
            data["grid"]["n_t"] = grid_n
            data["grid"]["n_x"] = max(grid_n // 2, 8)
        if seed is not None:
            data["seed"] = seed
        try:
            return RunConfig.model_validate(data)
        except ValidationError as exc:
            raise ConfigurationError(_first_error(exc)) from exc


def _first_error(exc: ValidationError) -> str:
    err = exc.errors()[0]
    loc = ".".join(str(p) for p in err.get("loc", ()))
    return f"{loc}: {err.get('msg', 'invalid value')}" if loc else err.get("msg", "invalid value")


def _locate(text: str, loc: Tuple[Union[str, int], ...]) -> Optional[int]:
    """1-based line of the YAML node at a pydantic error location."""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return None
    line = node.start_mark.line + 1 if node is not None else None
    for key in loc:
        if isinstance(node, yaml.MappingNode):
            match = next(((k, v) for k, v in node.value if k.value == str(key)), None)
            if match is None:
                break
            line = match[0].start_mark.line + 1
            node = match[1]
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
            line = node.start_mark.line + 1
        else:
            break
    return line


def parse_config(text: str) -> RunConfig:
    """
    Parse and validate a YAML run configuration.

    Raises:
        ConfigurationError: With the offending line for syntax and validation errors
    """
    try:
        data: Any = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigurationError(f"invalid YAML: {getattr(exc, 'problem', exc)}", line) from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigurationError("config must be a mapping at the top level", 1)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        loc = tuple(exc.errors()[0].get("loc", ()))
        raise ConfigurationError(_first_error(exc), _locate(text, loc)) from exc


def load_config(path: Optional[Union[str, Path]] = None) -> RunConfig:
    """
    Load a run configuration file, or the built-in defaults when path is None.

    Raises:
        ConfigurationError: If the file is missing or invalid
    """
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    return parse_config(path.read_text(encoding="utf-8"))
