"""Functional data sampled on an equally spaced grid over [0, 1].

The L2 inner product is discretized as a plain average over the ``T`` grid
points (weight ``1/T``). Any constant rescaling cancels in the argmin/argmax
selections made elsewhere in the package, and the plain average keeps the
rank-one distance identity exact in floating point up to rounding.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import GridMismatchError

__all__ = [
    "Grid",
    "GridFunction",
    "FunctionalSample",
    "inner",
    "norm",
    "check_same_grid",
]

_HEADER = struct.Struct("<qq")


@dataclass(frozen=True)
class Grid:
    """``t_count`` equally spaced points on [0, 1], both endpoints included."""

    t_count: int

    def __post_init__(self):
        if int(self.t_count) != self.t_count or self.t_count < 1:
            raise ValueError(f"t_count must be a positive integer, got {self.t_count!r}")
        object.__setattr__(self, "t_count", int(self.t_count))

    @cached_property
    def points(self) -> np.ndarray:
        if self.t_count == 1:
            pts = np.zeros(1)
        else:
            pts = np.arange(self.t_count) / (self.t_count - 1)
        pts.setflags(write=False)
        return pts

    @property
    def weight(self) -> float:
        """Quadrature weight of every grid point."""
        return 1.0 / self.t_count

    def __len__(self):
        return self.t_count


def check_same_grid(a: Grid, b: Grid) -> None:
    if a != b:
        raise GridMismatchError(f"grid mismatch: T={a.t_count} vs T={b.t_count}")


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if not np.all(np.isfinite(arr)):
        raise ValueError("values must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values ``X(t_j)`` of one curve on ``grid``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.shape != (self.grid.t_count,):
            raise ValueError(
                f"expected {self.grid.t_count} values, got shape {vals.shape}"
            )
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "GridFunction":
        return cls(grid, fn(grid.points))

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "GridFunction":
        return cls(grid, np.full(grid.t_count, float(c)))

    def __mul__(self, scalar):
        return GridFunction(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.values)


def inner(f: GridFunction, g: GridFunction) -> float:
    """Discrete L2 inner product ``(1/T) * sum_j f_j g_j``."""
    check_same_grid(f.grid, g.grid)
    # elementwise products commute, so the left-to-right sum is symmetric bit-for-bit
    prods = f.values * g.values
    total = 0.0
    for v in prods.tolist():
        total += v
    return total / f.grid.t_count


def norm(f: GridFunction) -> float:
    return float(np.sqrt(inner(f, f)))


@dataclass(frozen=True, eq=False)
class FunctionalSample:
    """``n`` curves on a shared grid, stored as an ``(n, T)`` array.

    ``labels`` carries generator ground truth (True = outlier) and is used for
    diagnostics only; no estimator looks at it.
    """

    grid: Grid
    rows: np.ndarray
    labels: np.ndarray | None = field(default=None)

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.float64, copy=True)
        if rows.ndim == 1 and rows.size == 0:
            rows = rows.reshape(0, self.grid.t_count)
        if rows.ndim != 2 or rows.shape[1] != self.grid.t_count:
            raise ValueError(
                f"rows must have shape (n, {self.grid.t_count}), got {rows.shape}"
            )
        if not np.all(np.isfinite(rows)):
            raise ValueError("sample values must be finite")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        if self.labels is not None:
            labels = np.array(self.labels, dtype=bool, copy=True)
            if labels.shape != (rows.shape[0],):
                raise ValueError("labels must have one entry per row")
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

    @classmethod
    def from_functions(cls, funcs) -> "FunctionalSample":
        funcs = list(funcs)
        if not funcs:
            raise ValueError("need at least one function to infer the grid")
        grid = funcs[0].grid
        for f in funcs[1:]:
            check_same_grid(grid, f.grid)
        return cls(grid, np.stack([f.values for f in funcs]))

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    def __len__(self):
        return self.n

    def __getitem__(self, i) -> GridFunction:
        return GridFunction(self.grid, self.rows[i])

    def __iter__(self):
        for i in range(self.n):
            yield self[i]

    def take(self, index) -> "FunctionalSample":
        """Sub-sample by slice or integer index array (labels follow)."""
        labels = None if self.labels is None else self.labels[index]
        return FunctionalSample(self.grid, self.rows[index], labels)

    def norms_sq(self) -> np.ndarray:
        """``||X_i||^2`` for every row, same weighting as :func:`inner`."""
        return np.einsum("ij,ij->i", self.rows, self.rows) / self.grid.t_count

    # -- serialization -------------------------------------------------

    def to_bytes(self) -> bytes:
        """Header ``(T, n)`` as little-endian int64, then row-major float64."""
        body = np.ascontiguousarray(self.rows, dtype="<f8").tobytes()
        return _HEADER.pack(self.grid.t_count, self.n) + body

    @classmethod
    def from_bytes(cls, data: bytes) -> "FunctionalSample":
        if len(data) < _HEADER.size:
            raise ValueError("truncated header")
        t_count, n = _HEADER.unpack_from(data)
        expected = _HEADER.size + 8 * t_count * n
        if len(data) != expected:
            raise ValueError(f"expected {expected} bytes, got {len(data)}")
        rows = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(n, t_count)
        return cls(Grid(t_count), rows)

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "FunctionalSample":
        path = Path(path)
        if path.suffix.lower() == ".csv":
            return cls.read_csv(path)
        return cls.from_bytes(path.read_bytes())

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"t{j}" for j in range(self.grid.t_count)])
            for row in self.rows:
                writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def read_csv(cls, path) -> "FunctionalSample":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = [[float(v) for v in line] for line in reader if line]
        t_count = len(header)
        return cls(Grid(t_count), np.array(rows, dtype=np.float64).reshape(len(rows), t_count))

    def write_labels_csv(self, path) -> None:
        if self.labels is None:
            raise ValueError("sample carries no labels")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["row", "outlier"])
            for i, flag in enumerate(self.labels):
                writer.writerow([i, int(flag)])
