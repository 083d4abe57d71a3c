"""
Serialization and fingerprinting for reproducible verification runs.

Reports are written atomically as JSON, tables as CSV through pandas, and
operator matrices in the ``.mop`` format: one JSON header line followed by
the row-major little-endian complex128 samples.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple, Union

import numpy as np
import pandas as pd

from .errors import ConfigurationError, InvalidInputError
from .grid import GridFunction, GridSpec
from .operators import DenseOperator
from .symbols import BivariateSymbol

MOP_MAGIC = "mellin-sio/mop"
PathLike = Union[str, Path]


@dataclass(frozen=True)
class Fingerprint:
    """Represents a file fingerprint for provenance tracking."""

    path: str
    size: int
    sha256: str


def _sha256(path: PathLike, nbytes: int = 1_000_000) -> str:
    """Compute SHA256 hash of file (first nbytes for large files)."""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        h.update(f.read(nbytes))
    return h.hexdigest()


def fingerprint(path: PathLike) -> Fingerprint:
    """
    Create a fingerprint for a file.

    Modification times are left out so fingerprints, and the reports that
    embed them, stay identical across checkouts.
    """
    st = os.stat(path)
    return Fingerprint(path=str(path), size=st.st_size, sha256=_sha256(path))


def params_key(params: Dict[str, Any]) -> str:
    """SHA-256 of a parameter mapping in canonical JSON form."""
    payload = json.dumps(params, sort_keys=True, default=str)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_metadata(meta_path: PathLike, payload: Dict[str, Any]) -> None:
    """
    Save a JSON document atomically with sorted keys.

    Args:
        meta_path: Destination path
        payload: Dictionary to serialize
    """
    text = json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n"
    _atomic_write(Path(meta_path), text.encode("utf-8"))


def load_metadata(meta_path: PathLike) -> Dict[str, Any]:
    """
    Load a JSON document written by save_metadata.

    Raises:
        ConfigurationError: If the file is missing or not valid JSON
    """
    path = Path(meta_path)
    if not path.is_file():
        raise ConfigurationError(f"report file not found: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc.msg})", exc.lineno) from exc


def save_table(path: PathLike, frame: pd.DataFrame) -> None:
    """Write a table as CSV atomically."""
    _atomic_write(Path(path), frame.to_csv(index=False).encode("utf-8"))


def load_table(path: PathLike) -> pd.DataFrame:
    """
    Load a CSV table.

    Raises:
        ValueError: If the format is not supported
    """
    ext = Path(path).suffix.lower()
    if ext != ".csv":
        raise ValueError(f"Unsupported format: {ext}")
    return pd.read_csv(path, float_precision="round_trip")


def _require_columns(frame: pd.DataFrame, columns: Tuple[str, ...], path: PathLike) -> None:
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise InvalidInputError(f"{path}: missing columns {missing}")


def _require_nodes(found: np.ndarray, expected: np.ndarray, what: str, path: PathLike) -> None:
    if found.shape != expected.shape or not np.allclose(found, expected, rtol=1e-12, atol=0.0):
        raise InvalidInputError(f"{path}: {what} column does not match the grid")


def grid_function_frame(f: GridFunction) -> pd.DataFrame:
    return pd.DataFrame({"t": f.spec.t, "Re": f.samples.real, "Im": f.samples.imag})


def save_grid_function(path: PathLike, f: GridFunction) -> None:
    """Write a grid function as CSV with columns t, Re, Im."""
    save_table(path, grid_function_frame(f))


def load_grid_function(path: PathLike, spec: GridSpec) -> GridFunction:
    """
    Read a grid function written by save_grid_function.

    Raises:
        InvalidInputError: If columns are missing or the t-nodes are not those of spec
    """
    frame = load_table(path)
    _require_columns(frame, ("t", "Re", "Im"), path)
    _require_nodes(frame["t"].to_numpy(dtype=float), spec.t, "t", path)
    return GridFunction(spec, frame["Re"].to_numpy(dtype=float) + 1j * frame["Im"].to_numpy(dtype=float))


def symbol_frame(a: BivariateSymbol) -> pd.DataFrame:
    """
    Long table with one row per (t, x) node.

    The rows at x = -inf and x = +inf carry the boundary columns.
    """
    spec = a.spec
    x = np.concatenate([[-np.inf], spec.x, [np.inf]])
    values = np.column_stack([a.boundary_minus, a.values, a.boundary_plus])
    return pd.DataFrame(
        {
            "t": np.repeat(spec.t, x.size),
            "x": np.tile(x, spec.n_t),
            "Re": values.real.ravel(),
            "Im": values.imag.ravel(),
        }
    )


def save_symbol(path: PathLike, a: BivariateSymbol) -> None:
    """Write a symbol as CSV with columns t, x, Re, Im."""
    save_table(path, symbol_frame(a))


def load_symbol(path: PathLike, spec: GridSpec, name: str = "symbol") -> BivariateSymbol:
    """
    Read a symbol written by save_symbol.

    Only the sampled values and boundary columns are stored; the result has
    no fiber rows and interpolates in x between grid nodes.

    Raises:
        InvalidInputError: If columns are missing or the nodes are not those of spec
    """
    frame = load_table(path)
    _require_columns(frame, ("t", "x", "Re", "Im"), path)
    width = spec.n_x + 2
    if len(frame) != spec.n_t * width:
        raise InvalidInputError(f"{path}: expected {spec.n_t * width} rows, got {len(frame)}")
    t = frame["t"].to_numpy(dtype=float).reshape(spec.n_t, width)[:, 0]
    x = frame["x"].to_numpy(dtype=float)[:width]
    _require_nodes(t, spec.t, "t", path)
    if not (x[0] == -np.inf and x[-1] == np.inf):
        raise InvalidInputError(f"{path}: boundary rows at x = -inf and x = inf are missing")
    _require_nodes(x[1:-1], spec.x, "x", path)
    values = frame["Re"].to_numpy(dtype=float) + 1j * frame["Im"].to_numpy(dtype=float)
    values = values.reshape(spec.n_t, width)
    return BivariateSymbol(
        spec=spec,
        values=values[:, 1:-1],
        boundary_minus=values[:, 0],
        boundary_plus=values[:, -1],
        name=name,
    )


def write_mop(
    path: PathLike,
    matrix: np.ndarray,
    grid: Optional[GridSpec] = None,
    provenance: str = "",
) -> None:
    """Write a complex matrix in the .mop binary format."""
    values = np.ascontiguousarray(np.asarray(matrix, dtype="<c16"))
    header = {
        "format": MOP_MAGIC,
        "shape": list(values.shape),
        "grid_hash": grid.grid_hash() if grid is not None else None,
        "grid": grid.model_dump() if grid is not None else None,
        "provenance": provenance,
    }
    line = json.dumps(header, sort_keys=True).encode("utf-8") + b"\n"
    _atomic_write(Path(path), line + values.tobytes(order="C"))


def read_mop(path: PathLike) -> tuple[np.ndarray, Dict[str, Any]]:
    """
    Read a .mop file.

    Returns:
        (matrix, header)

    Raises:
        InvalidInputError: If the header or payload is malformed
    """
    raw = Path(path).read_bytes()
    head, sep, body = raw.partition(b"\n")
    if not sep:
        raise InvalidInputError(f"{path}: missing .mop header")
    try:
        header = json.loads(head.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"{path}: unreadable .mop header") from exc
    if header.get("format") != MOP_MAGIC:
        raise InvalidInputError(f"{path}: not a .mop file")
    shape = tuple(header["shape"])
    expected = int(np.prod(shape)) * 16
    if len(body) != expected:
        raise InvalidInputError(f"{path}: expected {expected} payload bytes, found {len(body)}")
    return np.frombuffer(body, dtype="<c16").reshape(shape).astype(complex), header


def save_operator(path: PathLike, op: DenseOperator) -> None:
    write_mop(path, op.matrix, op.grid, op.provenance)


def load_operator(path: PathLike) -> DenseOperator:
    """Read a .mop file written by save_operator back into a DenseOperator."""
    matrix, header = read_mop(path)
    if header.get("grid") is None:
        raise InvalidInputError(f"{path}: operator file carries no grid")
    grid = GridSpec.model_validate(header["grid"])
    if grid.grid_hash() != header.get("grid_hash"):
        raise InvalidInputError(f"{path}: grid hash mismatch")
    return DenseOperator(matrix, grid, header.get("provenance", ""))


class SymbolCache:
    """
    On-disk cache of sampled symbol arrays keyed by their generating parameters.

    Entries live in ``<root>/<sha256>.mop``.
    """

    def __init__(self, root: PathLike):
        self.root = Path(root)
        self.hits = 0
        self.misses = 0

    def path_for(self, params: Dict[str, Any]) -> Path:
        return self.root / f"{params_key(params)}.mop"

    def fetch(self, params: Dict[str, Any], build: Callable[[], np.ndarray]) -> np.ndarray:
        """Return the cached array for params, building and storing it on a miss."""
        path = self.path_for(params)
        if path.is_file():
            self.hits += 1
            return read_mop(path)[0]
        self.misses += 1
        values = np.asarray(build(), dtype=complex)
        write_mop(path, values, provenance=json.dumps(params, sort_keys=True, default=str))
        return values
