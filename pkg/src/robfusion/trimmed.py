"""Impartial trimmed mean of rank-one covariance operators.

Each observation ``X_i`` defines ``W_i(f) = <X_i, f> X_i``. With
``r = floor((1 - alpha) n) + 1`` the estimator

1. computes all pairwise HS distances ``d_ij = ||W_i - W_j||`` via the
   rank-one closed form,
2. takes for every ``i`` the radius ``d_i^(r)`` of its ``r`` nearest
   neighbours (itself included, ``d_ii = 0``),
3. picks the centre ``gamma`` with the smallest radius, and
4. averages the kernels ``X_j(s) X_j(t)`` over the ``r`` neighbours of
   ``W_gamma``.

This is the approximate version of impartial trimming: the candidate balls are
restricted to those centred at sample points. No mean-centering is done.

Ties (equal radii, equal neighbour distances at the boundary) go to the
lowest index; a point always precedes others at distance zero from it.
"""

from __future__ import annotations

import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import CapacityError, NumericalInconsistencyError
from .grid import FunctionalSample, Grid
from .hs import NEGATIVE_TOL, CovMatrix

__all__ = [
    "TrimConfig",
    "TrimResult",
    "RadiusResult",
    "sample_cov",
    "mean_of_kernels",
    "trim_size",
    "pairwise_r_radius",
    "trimmed_mean",
    "distance_matrix",
    "iter_distance_rows",
    "BLOCK_ROWS",
    "DENSE_LIMIT_BYTES",
]

# fixed so that results never depend on the worker count
BLOCK_ROWS = 256
DENSE_LIMIT_BYTES = 2 * 1024**3


@dataclass(frozen=True)
class TrimConfig:
    alpha: float

    def __post_init__(self):
        if not (0.0 <= self.alpha < 1.0):
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha!r}")


@dataclass(frozen=True, eq=False)
class TrimResult:
    estimate: CovMatrix
    gamma: int
    kept_indices: np.ndarray  # ascending
    r: int
    radius: float

    def record(self) -> str:
        return json.dumps({"gamma": self.gamma, "r": self.r, "radius": self.radius})

    def write_bundle(self, path) -> None:
        """T x T matrix CSV with the ``{gamma, r, radius}`` record on a ``#`` line."""
        self.estimate.write_csv(path, header_record=self.record())

    @staticmethod
    def read_record(path) -> dict:
        with open(path) as fh:
            first = fh.readline()
        if not first.startswith("#"):
            raise ValueError("bundle has no record line")
        return json.loads(first[1:])


@dataclass(frozen=True, eq=False)
class RadiusResult:
    radii: np.ndarray
    radii_sq: np.ndarray
    neighbours: np.ndarray | None  # (n, r), nearest first


def mean_of_kernels(rows: np.ndarray, t_count: int) -> CovMatrix:
    rows = np.asarray(rows, dtype=np.float64)
    if rows.shape[0] == 0:
        raise ValueError("cannot average zero kernels")
    mat = rows.T @ rows / rows.shape[0]
    mat = 0.5 * (mat + mat.T)
    return CovMatrix(Grid(t_count), mat)


def sample_cov(sample: FunctionalSample) -> CovMatrix:
    """Average of the rank-one kernels ``X_i(s) X_i(t)`` (uncentered)."""
    if sample.n < 1:
        raise ValueError("empty sample")
    return mean_of_kernels(sample.rows, sample.grid.t_count)


def trim_size(n: int, alpha: float) -> int:
    """``min(n, floor((1 - alpha) n) + 1)``."""
    return min(n, int(np.floor((1.0 - alpha) * n)) + 1)


def _check_worst(worst):
    if worst < 0.0:
        raise NumericalInconsistencyError(
            f"squared HS distance {worst!r} is negative beyond tolerance"
        )


def _blocks(n):
    return [(s, min(s + BLOCK_ROWS, n)) for s in range(0, n, BLOCK_ROWS)]


def _kth_radii_sq(rows, norms_sq, t_count, kth, prune, workers):
    n = rows.shape[0]
    out = np.empty(n)
    lock = threading.Lock()
    state = {"bound": np.inf, "worst": 0.0}

    def work(span):
        s, e = span
        gram = rows[s:e] @ rows.T
        bound = state["bound"] if prune else np.inf
        worst = _kernels.block_kth_radius_sq(
            gram, s, norms_sq, float(t_count), NEGATIVE_TOL, kth, bound, out[s:e]
        )
        with lock:
            state["worst"] = min(state["worst"], worst)
            if prune:
                state["bound"] = min(state["bound"], float(out[s:e].min()))

    _run(work, _blocks(n), workers)
    _check_worst(state["worst"])
    return out


def _run(work, spans, workers):
    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, spans))
    else:
        for span in spans:
            work(span)


def _row_distance_sq(rows, norms_sq, t_count, i):
    # recompute through the same block product the radius pass used
    s = (i // BLOCK_ROWS) * BLOCK_ROWS
    e = min(s + BLOCK_ROWS, rows.shape[0])
    gram = rows[s:e] @ rows.T
    out = np.empty((e - s, rows.shape[0]))
    worst = _kernels.block_distance_sq(gram, s, norms_sq, float(t_count), NEGATIVE_TOL, out)
    _check_worst(worst)
    return out[i - s]


def _nearest(d2_row, i, r):
    n = d2_row.shape[0]
    idx = np.arange(n)
    order = np.lexsort((idx, idx != i, d2_row))
    return order[:r]


def pairwise_r_radius(
    sample: FunctionalSample, r: int, return_sets: bool = True, workers: int = 1
) -> RadiusResult:
    """Radius ``d_i^(r)`` of every point's ``r``-nearest-neighbour ball.

    With ``return_sets`` the ``(n, r)`` neighbour indices are returned as well,
    which needs the full distance matrix row by row (O(n r) memory).
    """
    n = sample.n
    if not (1 <= r <= n):
        raise ValueError(f"r must lie in [1, {n}], got {r}")
    norms_sq = sample.norms_sq()
    t = sample.grid.t_count
    radii_sq = _kth_radii_sq(sample.rows, norms_sq, t, r - 1, False, workers)
    neighbours = None
    if return_sets:
        neighbours = np.empty((n, r), dtype=np.intp)
        for start, block in iter_distance_rows(sample, squared=True):
            for b, row in enumerate(block):
                neighbours[start + b] = _nearest(row, start + b, r)
    return RadiusResult(np.sqrt(radii_sq), radii_sq, neighbours)


def trimmed_mean(sample: FunctionalSample, cfg: TrimConfig, workers: int = 1) -> TrimResult:
    """Impartial trimmed mean of the rank-one operators of ``sample``.

    Only the arg-min radius is needed, so rows whose ball provably cannot beat
    the best radius found so far skip the selection pass. The selected centre
    and estimate are identical to an exhaustive pass.
    """
    if not isinstance(cfg, TrimConfig):
        cfg = TrimConfig(float(cfg))
    n = sample.n
    if n < 2:
        raise ValueError(f"trimmed mean needs n >= 2, got {n}")
    r = trim_size(n, cfg.alpha)
    t = sample.grid.t_count
    rows = sample.rows
    norms_sq = sample.norms_sq()
    radii_sq = _kth_radii_sq(rows, norms_sq, t, r - 1, True, workers)
    gamma = int(np.argmin(radii_sq))
    d2 = _row_distance_sq(rows, norms_sq, t, gamma)
    kept = np.sort(_nearest(d2, gamma, r))
    estimate = mean_of_kernels(rows[kept], t)
    radius = float(np.sqrt(d2[kept].max()))
    kept.setflags(write=False)
    return TrimResult(estimate, gamma, kept, r, radius)


def iter_distance_rows(sample: FunctionalSample, squared: bool = False):
    """Yield ``(start, block)`` with ``block[b, j] = d_{start+b, j}``.

    Streaming variant of :func:`distance_matrix`; blocks have ``BLOCK_ROWS``
    rows except possibly the last.
    """
    rows = sample.rows
    norms_sq = sample.norms_sq()
    t = float(sample.grid.t_count)
    for s, e in _blocks(sample.n):
        gram = rows[s:e] @ rows.T
        out = np.empty((e - s, sample.n))
        worst = _kernels.block_distance_sq(gram, s, norms_sq, t, NEGATIVE_TOL, out)
        _check_worst(worst)
        yield s, (out if squared else np.sqrt(out, out=out))


def distance_matrix(sample: FunctionalSample, limit_bytes: int = DENSE_LIMIT_BYTES) -> np.ndarray:
    """Dense symmetric ``n x n`` matrix of HS distances between the ``W_i``."""
    n = sample.n
    if n < 1:
        raise ValueError("empty sample")
    need = 8 * n * n
    if need > limit_bytes:
        raise CapacityError(need, limit_bytes)
    out = np.empty((n, n))
    for s, block in iter_distance_rows(sample):
        out[s : s + block.shape[0]] = block
    # gemm need not be bitwise symmetric; mirror the upper triangle
    iu = np.triu_indices(n, 1)
    out[(iu[1], iu[0])] = out[iu]
    return out
