"""Median of medians: closed-form laws and asymptotic efficiency.

For blocks of odd length ``l = 2k + 1`` drawn from a parent with density ``f``
and CDF ``F``, each block median has density

    g(t) = (2k+1)! / (k!)^2 * F(t)^k (1 - F(t))^k f(t),

which is Beta(k+1, k+1) for a Uniform(0, 1) parent. The full-sample median
of ``n`` points is asymptotically normal with variance ``1 / (4 n f(theta)^2)``
and the median of ``m`` block medians with ``1 / (4 m g(theta)^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import optimize, special, stats

from ._rng import stream
from .errors import DegenerateLawError, InvalidLawError
from .fusion import lower_median, median_of_medians_batch

__all__ = [
    "MedianLaw",
    "AsymptoticVariances",
    "median_pdf",
    "beta_median_pdf",
    "parent_median",
    "fused_center",
    "asymptotic_variances",
    "uniform_relative_efficiency",
    "simulate_variance_ratio",
]

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class MedianLaw:
    """Law of the median of ``2k + 1`` iid draws from the parent ``(f, F)``."""

    k: int
    f: Callable[[float], float]
    F: Callable[[float], float]

    def __post_init__(self):
        if self.k < 0 or int(self.k) != self.k:
            raise ValueError(f"k must be a nonnegative integer, got {self.k!r}")

    @property
    def l(self) -> int:  # noqa: E743
        return 2 * self.k + 1

    @classmethod
    def uniform(cls, k: int) -> "MedianLaw":
        return cls(k, lambda t: 1.0 if 0.0 <= t <= 1.0 else 0.0, lambda t: min(1.0, max(0.0, t)))

    @classmethod
    def normal(cls, k: int, loc: float = 0.0, scale: float = 1.0) -> "MedianLaw":
        dist = stats.norm(loc, scale)
        return cls(k, lambda t: float(dist.pdf(t)), lambda t: float(dist.cdf(t)))


class AsymptoticVariances(NamedTuple):
    var_full: float
    var_fused: float


def _log_coef(k: int) -> float:
    return special.gammaln(2 * k + 2) - 2.0 * special.gammaln(k + 1)


def _order_stat_density(k, big_f, small_f):
    if k == 0:
        return small_f
    if small_f == 0.0 or big_f <= 0.0 or big_f >= 1.0:
        return 0.0
    log_g = _log_coef(k) + k * (math.log(big_f) + math.log1p(-big_f)) + math.log(small_f)
    return math.exp(log_g)


def median_pdf(law: MedianLaw, t: float) -> float:
    ft = float(law.f(t))
    cdf = float(law.F(t))
    if not ft >= 0.0:
        raise InvalidLawError(f"negative density {ft!r} at t={t!r}")
    if not (-_PROB_TOL <= cdf <= 1.0 + _PROB_TOL):
        raise InvalidLawError(f"CDF value {cdf!r} outside [0, 1] at t={t!r}")
    return _order_stat_density(law.k, min(1.0, max(0.0, cdf)), ft)


def beta_median_pdf(k: int, t: float) -> float:
    """Density of the median of ``2k + 1`` Uniform(0, 1) draws."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if not (0.0 <= t <= 1.0):
        return 0.0
    return _order_stat_density(k, t, 1.0)


def _bracket(fn, target):
    lo, hi = -1.0, 1.0
    while fn(lo) > target:
        lo *= 2.0
        if lo < -1e12:
            raise InvalidLawError("cannot bracket the median from below")
    while fn(hi) < target:
        hi *= 2.0
        if hi > 1e12:
            raise InvalidLawError("cannot bracket the median from above")
    return lo, hi


def _solve_half(fn):
    lo, hi = _bracket(fn, 0.5)
    if fn(lo) == 0.5:
        return lo
    if fn(hi) == 0.5:
        return hi
    return optimize.bisect(lambda t: fn(t) - 0.5, lo, hi, xtol=1e-12, rtol=4 * np.finfo(float).eps)


def parent_median(law: MedianLaw) -> float:
    """Median of the parent law, by bisection on ``F``."""
    return _solve_half(lambda t: float(law.F(t)))


def fused_center(law: MedianLaw) -> tuple:
    """``(theta_fused, bias)``: median of the block-median law and its offset.

    The block median has CDF ``I_{F(t)}(k+1, k+1)`` (regularized incomplete
    beta), so for a continuous parent the offset vanishes up to bisection
    precision; it is computed rather than assumed.
    """
    a = law.k + 1.0
    theta_fused = _solve_half(lambda t: float(special.betainc(a, a, min(1.0, max(0.0, law.F(t))))))
    return theta_fused, theta_fused - parent_median(law)


def asymptotic_variances(
    law: MedianLaw, n: int, m: int, theta: float | None = None
) -> AsymptoticVariances:
    if n != m * law.l:
        raise ValueError(f"n={n} must equal m * (2k+1) = {m * law.l}")
    if theta is None:
        theta = parent_median(law)
    f_theta = float(law.f(theta))
    if f_theta <= 0.0:
        raise DegenerateLawError(f"parent density vanishes at its median {theta!r}")
    theta_fused, _ = fused_center(law)
    g_theta = median_pdf(law, theta_fused)
    if g_theta <= 0.0:
        raise DegenerateLawError("block-median density vanishes at its median")
    return AsymptoticVariances(1.0 / (4.0 * n * f_theta**2), 1.0 / (4.0 * m * g_theta**2))


def uniform_relative_efficiency(k: int) -> float:
    """``var_full / var_fused`` for a Uniform(0, 1) parent: ``g(1/2)^2 / l``."""
    g = beta_median_pdf(k, 0.5)
    return g * g / (2 * k + 1)


def simulate_variance_ratio(
    k: int, m: int, replicates: int, seed: int = 0, chunk: int = 2000
) -> float:
    """Monte Carlo ``Var(full median) / Var(median of medians)``, Uniform parent.

    Both estimators are computed on the same ``n = m (2k + 1)`` draws per
    replicate. Replicates run in fixed chunks with their own random streams.
    """
    n = m * (2 * k + 1)
    full = np.empty(replicates)
    fused = np.empty(replicates)
    for c, s in enumerate(range(0, replicates, chunk)):
        e = min(s + chunk, replicates)
        x = stream(seed, c).random((e - s, n))
        full[s:e] = lower_median(x, axis=1)
        fused[s:e] = median_of_medians_batch(x, m)
    return float(np.var(full, ddof=1) / np.var(fused, ddof=1))
