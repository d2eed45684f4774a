"""Synthetic functional data from a simplified Kraus model.

Each curve is

    X(t) = mu(t) + sqrt(2) sum_k lambda_k a_k sin(2 pi k t)
                 + sqrt(2) sum_k nu_k b_k cos(2 pi k t),

with ``lambda_k = k^-3``, ``nu_k = 3^-k`` and iid standard normal ``a_k, b_k``.
Central curves have ``mu = 0``; outliers have ``mu(t) = 2 - 8 sin(pi t)`` and
the same random fluctuation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._rng import stream
from .grid import FunctionalSample, Grid
from .hs import CovMatrix

__all__ = ["KrausConfig", "generate", "true_cov", "outlier_mean", "harmonics", "CHUNK_ROWS"]

# rows per RNG stream; fixed so output is independent of how rows are scheduled
CHUNK_ROWS = 4096

_FLAG_STREAM = 0
_COEF_STREAM = 1
_PLACEMENT_STREAM = 2


@dataclass(frozen=True)
class KrausConfig:
    n: int
    p: float = 0.0
    t_count: int = 20
    seed: int = 0
    k_max: int = 10
    # False zeroes every Gaussian coefficient (deterministic curves, for tests)
    noise: bool = True
    # exactly round(p n) outliers at random positions instead of Bernoulli(p) flags
    fixed_count: bool = False

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        if not (0.0 <= self.p < 1.0):
            raise ValueError(f"p must lie in [0, 1), got {self.p!r}")
        if self.t_count < 2:
            raise ValueError("t_count must be at least 2")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")


def outlier_mean(t):
    return 2.0 - 8.0 * np.sin(np.pi * np.asarray(t, dtype=np.float64))


def harmonics(grid: Grid, k_max: int):
    """``(A, B)`` with rows ``A_k(t) = sqrt2 lambda_k sin(2 pi k t)``, ``B_k = sqrt2 nu_k cos``."""
    k = np.arange(1, k_max + 1, dtype=np.float64)
    lam = k ** -3.0
    nu = (1.0 / 3.0) ** k
    phase = 2.0 * np.pi * np.outer(k, grid.points)
    a = np.sqrt(2.0) * lam[:, None] * np.sin(phase)
    b = np.sqrt(2.0) * nu[:, None] * np.cos(phase)
    return a, b


def _outlier_flags(cfg: KrausConfig) -> np.ndarray:
    p = cfg.p
    if cfg.fixed_count:
        count = int(round(p * cfg.n))
        pos = stream(cfg.seed, _PLACEMENT_STREAM).permutation(cfg.n)[:count]
        flags = np.zeros(cfg.n, dtype=bool)
        flags[pos] = True
        return flags
    flags = np.empty(cfg.n, dtype=bool)
    for s in range(0, cfg.n, CHUNK_ROWS):
        e = min(s + CHUNK_ROWS, cfg.n)
        u = stream(cfg.seed, _FLAG_STREAM, s // CHUNK_ROWS).random(e - s)
        flags[s:e] = u < p
    return flags


def generate(cfg: KrausConfig) -> FunctionalSample:
    grid = Grid(cfg.t_count)
    a_basis, b_basis = harmonics(grid, cfg.k_max)
    basis = np.vstack([a_basis, b_basis])  # (2 k_max, T)
    flags = _outlier_flags(cfg)
    rows = np.zeros((cfg.n, cfg.t_count))
    if cfg.noise:
        for s in range(0, cfg.n, CHUNK_ROWS):
            e = min(s + CHUNK_ROWS, cfg.n)
            coef = stream(cfg.seed, _COEF_STREAM, s // CHUNK_ROWS).standard_normal(
                (e - s, 2 * cfg.k_max)
            )
            # fixed-order accumulation: a row's values do not depend on the chunk shape
            block = rows[s:e]
            for h in range(basis.shape[0]):
                block += coef[:, h, None] * basis[h]
    rows[flags] += outlier_mean(grid.points)
    return FunctionalSample(grid, rows, flags)


def true_cov(cfg: KrausConfig) -> CovMatrix:
    """Covariance kernel of the central (mu = 0) process on the grid."""
    grid = Grid(cfg.t_count)
    a, b = harmonics(grid, cfg.k_max)
    mat = a.T @ a + b.T @ b
    return CovMatrix(grid, 0.5 * (mat + mat.T))
