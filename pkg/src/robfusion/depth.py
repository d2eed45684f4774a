"""Empirical spatial depth and deepest-point selection.

For a point ``x`` and a finite sample ``X_1..X_m`` in a normed space,

    D(x) = 1 - || (1/m) sum_j (X_j - x) / ||X_j - x|| ||.

Points are handled as rows of float arrays under the Euclidean norm; callers
embed richer objects (covariance kernels) so that Euclidean distance matches
the norm of interest, see :meth:`robfusion.hs.CovMatrix.embed`.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

__all__ = ["DepthResult", "spatial_depth", "deepest", "as_points"]


@dataclass(frozen=True)
class DepthResult:
    depths: np.ndarray
    argmax_index: int
    max_depth: float


def as_points(points) -> np.ndarray:
    """Coerce scalars / sequences to an ``(m, dim)`` float array."""
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"points must be 1-D or 2-D, got ndim={arr.ndim}")
    if arr.shape[0] == 0:
        raise ValueError("empty sample")
    if arr.shape[1] == 0:
        raise ValueError("points must have at least one coordinate")
    if not np.all(np.isfinite(arr)):
        raise ValueError("points must be finite")
    return arr


def _depth_of(x: np.ndarray, sample: np.ndarray) -> float:
    diff = sample - x
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    # only exact coincidences are skipped; they still count in the divisor
    hit = dist > 0.0
    units = np.zeros_like(diff)
    units[hit] = diff[hit] / dist[hit, None]
    mean = units.sum(axis=0) / sample.shape[0]
    depth = 1.0 - float(np.sqrt(mean @ mean))
    return min(1.0, max(0.0, depth))


def spatial_depth(x, sample) -> float:
    """Spatial depth of ``x`` with respect to the empirical law of ``sample``."""
    pts = as_points(sample)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.shape != (pts.shape[1],):
        raise ValueError(
            f"dimension mismatch: point has shape {x.shape}, sample has dim {pts.shape[1]}"
        )
    return _depth_of(x, pts)


def deepest(points, workers: int = 1) -> DepthResult:
    """Depth of every candidate within the candidate set (itself included).

    Exhaustive ``O(m^2 dim)``. Ties resolve to the lowest index. ``workers``
    only changes scheduling; every depth is written to its own slot.
    """
    pts = as_points(points)
    m = pts.shape[0]
    depths = np.empty(m)

    def work(j):
        depths[j] = _depth_of(pts[j], pts)

    if workers > 1 and m > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, range(m)))
    else:
        for j in range(m):
            work(j)
    idx = int(np.argmax(depths))  # first occurrence on ties
    depths.setflags(write=False)
    return DepthResult(depths, idx, float(depths[idx]))
