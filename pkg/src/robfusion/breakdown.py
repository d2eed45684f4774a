"""Breakdown of median-type fusion under random contamination.

Each of the ``n = m l`` observations is an outlier independently with
probability ``p``. A block of length ``l = 2k + 1`` breaks when its outlier
count exceeds ``k = (l - 1)/2``; for even ``l`` that means at least ``l/2``
outliers, so an exactly half-contaminated block counts as broken. The fused
(median-type) estimator breaks when at least half of the ``m`` blocks break,
again with the exact half counting as broken.

The quantity ``U`` reported per replicate is the fraction of blocks that stay
intact.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special

from ._rng import stream
from .errors import BoundInapplicableError

__all__ = [
    "BreakdownConfig",
    "BreakdownReport",
    "simulate_breakdown",
    "block_break_prob",
    "block_break_bound",
    "fused_break_prob_exact",
    "binom_upper_tail",
]

_CHUNK = 1000
_WALK_CHUNK = 50


@dataclass(frozen=True)
class BreakdownConfig:
    n: int
    m: int
    p: float
    replicates: int = 5000
    seed: int = 0
    # draw n Bernoulli indicators and walk S_j instead of Binomial block counts
    literal_walk: bool = False
    keep_u: bool = False

    def __post_init__(self):
        if self.m < 1 or self.n < self.m or self.n % self.m:
            raise ValueError(f"n={self.n} must be a positive multiple of m={self.m}")
        if not (0.0 <= self.p <= 1.0):
            raise ValueError(f"p must lie in [0, 1], got {self.p!r}")
        if self.replicates < 1:
            raise ValueError("replicates must be positive")

    @property
    def l(self) -> int:  # noqa: E743
        return self.n // self.m


@dataclass(frozen=True, eq=False)
class BreakdownReport:
    break_fraction: float
    replicates: int
    per_replicate_u: np.ndarray | None = None


def _block_counts(cfg: BreakdownConfig, chunk_index: int, size: int) -> np.ndarray:
    rng = stream(cfg.seed, int(cfg.literal_walk), chunk_index)
    if not cfg.literal_walk:
        return rng.binomial(cfg.l, cfg.p, size=(size, cfg.m))
    hits = rng.random((size, cfg.n)) < cfg.p
    walk = np.cumsum(hits, axis=1, dtype=np.int64)
    ends = walk[:, cfg.l - 1 :: cfg.l]
    return np.diff(ends, axis=1, prepend=0)


def simulate_breakdown(cfg: BreakdownConfig, workers: int = 1) -> BreakdownReport:
    chunk = _WALK_CHUNK if cfg.literal_walk else _CHUNK
    spans = [(s, min(s + chunk, cfg.replicates)) for s in range(0, cfg.replicates, chunk)]
    broken_blocks = np.empty(cfg.replicates, dtype=np.int64)

    def work(c):
        s, e = spans[c]
        counts = _block_counts(cfg, c, e - s)
        broken_blocks[s:e] = np.count_nonzero(2 * counts >= cfg.l, axis=1)

    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, range(len(spans))))
    else:
        for c in range(len(spans)):
            work(c)

    breaks = 2 * broken_blocks >= cfg.m
    u = None
    if cfg.keep_u:
        u = (cfg.m - broken_blocks) / cfg.m
        u.setflags(write=False)
    return BreakdownReport(float(breaks.mean()), cfg.replicates, u)


def binom_upper_tail(n: int, p: float, kmin: int) -> float:
    """``P(Binom(n, p) >= kmin)`` by log-space summation of the pmf."""
    if kmin <= 0:
        return 1.0
    if kmin > n:
        return 0.0
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0
    y = np.arange(kmin, n + 1, dtype=np.float64)
    log_terms = (
        special.gammaln(n + 1)
        - special.gammaln(y + 1)
        - special.gammaln(n - y + 1)
        + y * math.log(p)
        + (n - y) * math.log1p(-p)
    )
    return float(min(1.0, math.exp(special.logsumexp(log_terms))))


def block_break_prob(l: int, p: float) -> float:  # noqa: E741
    """``P(Y > (l-1)/2)`` for ``Y ~ Binom(l, p)``, i.e. ``P(2Y >= l)``.

    For odd ``l`` this is ``P(Y > l/2)``.
    """
    if l < 1:
        raise ValueError("l must be positive")
    return binom_upper_tail(l, p, (l + 1) // 2)


def block_break_bound(l: int, p: float) -> float:  # noqa: E741
    """Hoeffding bound ``exp(-2 l (1/2 - p)^2)`` on :func:`block_break_prob`."""
    if p >= 0.5:
        raise BoundInapplicableError(f"the bound needs p < 1/2, got {p!r}")
    return math.exp(-2.0 * l * (0.5 - p) ** 2)


def fused_break_prob_exact(m: int, l: int, p: float) -> float:  # noqa: E741
    """``P(Binom(m, q) >= ceil(m/2))`` with ``q`` the block break probability."""
    if m < 1:
        raise ValueError("m must be positive")
    q = block_break_prob(l, p)
    return binom_upper_tail(m, q, -(-m // 2))
