"""Split / estimate / fuse.

A sample of size ``n = m l`` is cut into ``m`` contiguous blocks, an estimator
runs on every block, and the ``m`` block estimates are fused either by their
entrywise average or by selecting the candidate of maximal spatial depth among
them (HS geometry for covariance kernels).
"""

from __future__ import annotations

import enum
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .depth import DepthResult, deepest
from .grid import FunctionalSample
from .hs import CovMatrix
from .trimmed import TrimConfig, sample_cov, trimmed_mean

__all__ = [
    "SplitPlan",
    "EstimatorKind",
    "FusionKind",
    "FusionOutcome",
    "split",
    "estimate",
    "fuse_estimates",
    "run_fusion",
    "lower_median",
    "median_of_medians",
    "median_of_medians_batch",
]


@dataclass(frozen=True)
class SplitPlan:
    n: int
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.n % self.m:
            raise ValueError(f"n={self.n} is not a multiple of m={self.m}; truncate first")
        if self.n // self.m < 2:
            raise ValueError(f"subsample length n/m={self.n // self.m} is below 2")

    @property
    def l(self) -> int:  # noqa: E743
        return self.n // self.m

    @classmethod
    def truncating(cls, n: int, m: int) -> "SplitPlan":
        """Largest plan with ``m`` blocks that fits in ``n`` rows."""
        return cls((n // m) * m, m)


class FusionKind(str, enum.Enum):
    DEEPEST = "deepest"
    AVERAGE = "average"


@dataclass(frozen=True)
class EstimatorKind:
    tag: str
    alpha: float | None = None

    def __post_init__(self):
        if self.tag not in ("classical_cov", "robust_trimmed_cov"):
            raise ValueError(f"unknown estimator {self.tag!r}")
        if (self.alpha is None) != (self.tag == "classical_cov"):
            raise ValueError("alpha is required for the robust estimator and only for it")
        if self.alpha is not None:
            TrimConfig(self.alpha)

    @classmethod
    def classical(cls) -> "EstimatorKind":
        return cls("classical_cov")

    @classmethod
    def robust(cls, alpha: float) -> "EstimatorKind":
        return cls("robust_trimmed_cov", float(alpha))


@dataclass(frozen=True, eq=False)
class FusionOutcome:
    per_subsample: list
    fused: CovMatrix
    depth_result: DepthResult | None
    timings: dict = field(default_factory=dict)

    def record(self) -> str:
        rec = {k: v for k, v in self.timings.items() if k != "time_blocks"}
        if self.depth_result is not None:
            rec["argmax_index"] = self.depth_result.argmax_index
            rec["max_depth"] = self.depth_result.max_depth
        return json.dumps(rec)

    def write_bundle(self, path) -> None:
        self.fused.write_csv(path, header_record=self.record())


def split(sample: FunctionalSample, plan: SplitPlan) -> list:
    if sample.n != plan.n:
        raise ValueError(f"sample has {sample.n} rows, plan expects {plan.n}")
    l = plan.l  # noqa: E741
    return [sample.take(slice(j * l, (j + 1) * l)) for j in range(plan.m)]


def estimate(sample: FunctionalSample, est: EstimatorKind) -> CovMatrix:
    if est.tag == "classical_cov":
        return sample_cov(sample)
    return trimmed_mean(sample, TrimConfig(est.alpha)).estimate


def fuse_estimates(estimates, fuse: FusionKind | str, workers: int = 1):
    """Return ``(fused, depth_result)``; ``depth_result`` is None for averaging."""
    fuse = FusionKind(fuse)
    estimates = list(estimates)
    if not estimates:
        raise ValueError("nothing to fuse")
    grid = estimates[0].grid
    if fuse is FusionKind.AVERAGE:
        acc = np.zeros_like(estimates[0].m)
        for e in estimates:
            acc += e.m
        return CovMatrix(grid, acc / len(estimates)), None
    res = deepest(np.stack([e.embed() for e in estimates]), workers=workers)
    return estimates[res.argmax_index], res


def run_fusion(
    sample: FunctionalSample,
    plan: SplitPlan,
    est: EstimatorKind,
    fuse: FusionKind | str,
    workers: int = 1,
) -> FusionOutcome:
    """Full pipeline; wall-clock cost is ``split + blocks + fuse``.

    ``timings`` holds ``time_split``, per-block ``time_blocks``,
    ``time_blocks_total`` (sum), ``time_blocks_max``, ``time_fuse`` and the
    pipeline wall time ``time_total``.
    """
    t_start = time.perf_counter()
    blocks = split(sample, plan)
    t_split = time.perf_counter() - t_start

    slots = [None] * plan.m
    durations = np.zeros(plan.m)

    def work(j):
        t0 = time.perf_counter()
        slots[j] = estimate(blocks[j], est)
        durations[j] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if workers > 1 and plan.m > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, range(plan.m)))
    else:
        for j in range(plan.m):
            work(j)
    t1 = time.perf_counter()
    fused, depth_result = fuse_estimates(slots, fuse, workers=workers)
    t_fuse = time.perf_counter() - t1
    timings = {
        "time_split": t_split,
        "time_blocks": durations.tolist(),
        "time_blocks_total": float(durations.sum()),
        "time_blocks_max": float(durations.max()),
        "time_blocks_wall": t1 - t0,
        "time_fuse": t_fuse,
        "time_total": time.perf_counter() - t_start,
    }
    return FusionOutcome(slots, fused, depth_result, timings)


def lower_median(values, axis=-1):
    """Middle order statistic; the lower of the two middle ones for even length."""
    values = np.asarray(values, dtype=np.float64)
    k = (values.shape[axis] - 1) // 2
    return np.take(np.partition(values, k, axis=axis), k, axis=axis)


def median_of_medians(values, plan: SplitPlan) -> float:
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (plan.n,):
        raise ValueError(f"expected {plan.n} values, got shape {values.shape}")
    return float(lower_median(lower_median(values.reshape(plan.m, plan.l))))


def median_of_medians_batch(values, m: int) -> np.ndarray:
    """Row-wise median of medians of an ``(R, n)`` array; blocks of ``n/m``.

    Unlike :class:`SplitPlan` this allows block length 1 (plain median).
    """
    values = np.asarray(values, dtype=np.float64)
    r, n = values.shape
    if n % m:
        raise ValueError(f"n={n} is not a multiple of m={m}")
    return lower_median(lower_median(values.reshape(r, m, n // m)))
