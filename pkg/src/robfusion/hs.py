"""Rank-one Hilbert-Schmidt operators and discretized covariance kernels.

A rank-one operator ``W(f) = <x, f> x`` is kept as its generating curve
``x``; its kernel ``x(s) x(t)`` is only built on request (:func:`materialize`).
Pairwise HS distances between rank-one operators use the closed form

    ||W_i - W_j||^2 = ||x_i||^4 + ||x_j||^4 - 2 <x_i, x_j>^2,

which costs O(T) per pair instead of O(T^2).

Kernels are weighted by ``1/T^2`` in the HS norm, the weight under which the
closed form and the materialized-kernel distance coincide.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GridMismatchError, NumericalInconsistencyError
from .grid import Grid, GridFunction, check_same_grid, inner

__all__ = [
    "RankOneOperator",
    "CovMatrix",
    "apply",
    "hs_distance_sq",
    "materialize",
    "frobenius_hs_norm",
    "cov_hs_distance",
    "clamp_distance_sq",
    "NEGATIVE_TOL",
]

# relative to 1 + ||x_i||^4 + ||x_j||^4
NEGATIVE_TOL = 1e-9

_SYM_TOL = 1e-12
_HEADER = struct.Struct("<qq")


@dataclass(frozen=True, eq=False)
class RankOneOperator:
    x: GridFunction
    cached_norm_sq: float

    @classmethod
    def from_function(cls, x: GridFunction) -> "RankOneOperator":
        return cls(x, inner(x, x))

    @property
    def grid(self) -> Grid:
        return self.x.grid

    @property
    def eigenvalue(self) -> float:
        """The single nonzero eigenvalue, ``||x||^2``."""
        return self.cached_norm_sq


@dataclass(frozen=True, eq=False)
class CovMatrix:
    """Covariance kernel values ``rho(t_s, t_t)`` on a grid."""

    grid: Grid
    m: np.ndarray

    def __post_init__(self):
        mat = np.array(self.m, dtype=np.float64, copy=True)
        t = self.grid.t_count
        if mat.shape != (t, t):
            raise ValueError(f"expected ({t}, {t}) matrix, got {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise ValueError("covariance entries must be finite")
        if np.any(np.abs(mat - mat.T) > _SYM_TOL * (1.0 + np.abs(mat))):
            raise ValueError("covariance matrix is not symmetric")
        mat.setflags(write=False)
        object.__setattr__(self, "m", mat)

    def embed(self) -> np.ndarray:
        """Flattened entries scaled by ``1/T``.

        Euclidean distance between embeddings equals :func:`cov_hs_distance`.
        """
        return self.m.ravel() / self.grid.t_count

    def __sub__(self, other: "CovMatrix") -> "CovMatrix":
        check_same_grid(self.grid, other.grid)
        return CovMatrix(self.grid, self.m - other.m)

    def to_bytes(self) -> bytes:
        t = self.grid.t_count
        return _HEADER.pack(t, t) + np.ascontiguousarray(self.m, dtype="<f8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "CovMatrix":
        t, rows = _HEADER.unpack_from(data)
        if rows != t or len(data) != _HEADER.size + 8 * t * t:
            raise ValueError("not a square covariance payload")
        return cls(Grid(t), np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(t, t))

    def write_csv(self, path, header_record: str | None = None) -> None:
        """T rows by T columns; an optional record goes on a leading ``#`` line."""
        with open(path, "w", newline="") as fh:
            if header_record is not None:
                fh.write(f"# {header_record}\n")
            writer = csv.writer(fh)
            for row in self.m:
                writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def read_csv(cls, path) -> "CovMatrix":
        rows = []
        with open(path, newline="") as fh:
            for line in csv.reader(ln for ln in fh if not ln.startswith("#")):
                if line:
                    rows.append([float(v) for v in line])
        mat = np.array(rows, dtype=np.float64)
        return cls(Grid(mat.shape[0]), mat)

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())


def apply(w: RankOneOperator, f: GridFunction) -> GridFunction:
    """``W(f) = <x, f> x``."""
    check_same_grid(w.grid, f.grid)
    return GridFunction(w.grid, inner(w.x, f) * w.x.values)


def clamp_distance_sq(d2, scale):
    """Zero out benign negative cancellation; raise on clear inconsistency.

    ``scale`` is ``||x_i||^4 + ||x_j||^4`` (scalar or broadcastable array).
    """
    d2 = np.asarray(d2, dtype=np.float64)
    if np.any(d2 < -NEGATIVE_TOL * (1.0 + np.asarray(scale))):
        raise NumericalInconsistencyError(
            f"squared HS distance {float(np.min(d2))!r} is negative beyond tolerance"
        )
    return np.maximum(d2, 0.0)


def hs_distance_sq(wi: RankOneOperator, wj: RankOneOperator) -> float:
    if wi.grid != wj.grid:
        raise GridMismatchError("rank-one operators live on different grids")
    a, b = wi.cached_norm_sq, wj.cached_norm_sq
    g = inner(wi.x, wj.x)
    d2 = a * a + b * b - 2.0 * g * g
    return float(clamp_distance_sq(d2, a * a + b * b))


def materialize(w: RankOneOperator) -> CovMatrix:
    x = w.x.values
    return CovMatrix(w.grid, np.outer(x, x))


def frobenius_hs_norm(a: CovMatrix) -> float:
    t = a.grid.t_count
    return float(np.sqrt(np.sum(a.m * a.m)) / t)


def cov_hs_distance(a: CovMatrix, b: CovMatrix) -> float:
    check_same_grid(a.grid, b.grid)
    diff = a.m - b.m
    return float(np.sqrt(np.sum(diff * diff)) / a.grid.t_count)
