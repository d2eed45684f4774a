"""Experiment runners behind the command line: breakdown table, covariance
estimator comparison, median efficiency table.

Every runner returns its rows and, when ``output_path`` is set, writes them as
CSV with a header. Floats are written with ``repr`` so that a parsed file
re-emits byte-identically.
"""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from ._rng import stream
from .breakdown import BreakdownConfig, simulate_breakdown
from .datagen import KrausConfig, generate, true_cov
from .fusion import EstimatorKind, FusionKind, SplitPlan, fuse_estimates, run_fusion, split, estimate
from .grid import FunctionalSample
from .hs import cov_hs_distance
from .median_toy import (
    MedianLaw,
    asymptotic_variances,
    beta_median_pdf,
    simulate_variance_ratio,
)
from .trimmed import TrimConfig, sample_cov, trimmed_mean

log = logging.getLogger(__name__)

__all__ = [
    "ExperimentConfig",
    "ExperimentRow",
    "load_config",
    "derive_seed",
    "run_table1",
    "run_table23",
    "run_median_eff",
    "format_csv",
    "parse_csv",
    "TABLE1_M",
    "TABLE1_P",
]

TABLE1_M = (5, 10, 30, 50, 100, 150)
TABLE1_P = (0.45, 0.49, 0.495, 0.499)

_DEFAULTS = {
    "table1": dict(n=30000, m_list=TABLE1_M, p_list=TABLE1_P, replicates=5000),
    "table23": dict(n=50000, m_list=(20, 50, 100, 1000), p_list=(0.2,), replicates=5),
    "median_eff": dict(n=0, m_list=(501,), p_list=(), replicates=100000),
}


@dataclass
class ExperimentConfig:
    scenario: str
    n: int | None = None
    m_list: tuple | None = None
    p_list: tuple | None = None
    alpha: float = 0.25
    t_count: int = 20
    replicates: int | None = None
    seed: int = 0
    output_path: str | None = None
    threads: int = 1
    k_list: tuple = (0, 1, 2, 3, 5, 10)
    fixed_count: bool = False
    shuffle: bool = False
    literal_walk: bool = False

    def __post_init__(self):
        if self.scenario not in _DEFAULTS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        for key, value in _DEFAULTS[self.scenario].items():
            if getattr(self, key) is None:
                setattr(self, key, value)
        self.m_list = tuple(int(m) for m in self.m_list)
        self.p_list = tuple(float(p) for p in self.p_list)
        self.k_list = tuple(int(k) for k in self.k_list)
        if any(m < 1 for m in self.m_list):
            raise ValueError("m values must be positive")
        if self.replicates < 1:
            raise ValueError("replicates must be positive")
        if self.threads < 1:
            raise ValueError("threads must be positive")
        if self.scenario != "median_eff" and self.n < 1:
            raise ValueError("n must be positive")
        TrimConfig(self.alpha)

    def replace(self, **changes) -> "ExperimentConfig":
        data = asdict(self)
        data.update(changes)
        return ExperimentConfig(**data)


_LIST_KEYS = {"m_list", "p_list", "k_list"}
_ALIASES = {"m": "m_list", "p": "p_list", "k": "k_list", "t": "t_count", "reps": "replicates",
            "out": "output_path", "K": "replicates"}


def _coerce(name, raw):
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    if name in _LIST_KEYS:
        return tuple(v.strip() for v in str(raw).split(",") if v.strip())
    kind = types[name]
    if "bool" in kind:
        return str(raw).strip().lower() in ("1", "true", "yes", "on")
    if "int" in kind:
        return int(float(raw))
    if "float" in kind:
        return float(raw)
    return str(raw).strip()


def load_config(path=None, **overrides) -> ExperimentConfig:
    """Read a flat ``key = value`` file (``#`` comments) and apply overrides.

    Override values of ``None`` are ignored, so parsed CLI flags can be passed
    straight through.
    """
    raw = {}
    if path is not None:
        for line in Path(path).read_text().splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"malformed config line: {line!r}")
            raw[key.strip()] = value.strip()
    raw.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in fields(ExperimentConfig)}
    kwargs = {}
    for key, value in raw.items():
        name = _ALIASES.get(key, key)
        if name not in known:
            raise ValueError(f"unknown config key {key!r}")
        kwargs[name] = _coerce(name, value) if isinstance(value, str) else value
    if "scenario" not in kwargs:
        raise ValueError("config needs a scenario")
    return ExperimentConfig(**kwargs)


def derive_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence(int(seed), spawn_key=key).generate_state(1, np.uint64)[0])


# -- CSV helpers ---------------------------------------------------------

def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def format_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def parse_csv(text: str):
    """Inverse of :func:`format_csv`: header plus rows of ints/floats."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    rows = []
    for line in reader:
        if not line:
            continue
        rows.append([int(v) if v.lstrip("-").isdigit() else float(v) for v in line])
    return header, rows


def _emit(cfg, header, rows):
    text = format_csv(header, rows)
    if cfg.output_path:
        Path(cfg.output_path).write_text(text)
    return text


# -- Table 1 --------------------------------------------------------------

def run_table1(cfg: ExperimentConfig):
    """Breakdown fraction per ``(m, p)``; rows ``m``, one column per ``p``.

    Returns ``(header, rows, csv_text)``.
    """
    if cfg.scenario != "table1":
        raise ValueError("run_table1 needs scenario 'table1'")
    header = ["m"] + [f"p={p!r}" for p in cfg.p_list]
    rows = []
    for i, m in enumerate(cfg.m_list):
        row = [m]
        for j, p in enumerate(cfg.p_list):
            bcfg = BreakdownConfig(
                n=cfg.n, m=m, p=p, replicates=cfg.replicates,
                seed=derive_seed(cfg.seed, i, j), literal_walk=cfg.literal_walk,
            )
            row.append(simulate_breakdown(bcfg, workers=cfg.threads).break_fraction)
        log.info("table1 m=%d: %s", m, row[1:])
        rows.append(row)
    return header, rows, _emit(cfg, header, rows)


# -- Tables 2-3 -----------------------------------------------------------

@dataclass
class ExperimentRow:
    n: int
    m: int
    time0: float
    time1: float
    err_cov: float
    err_avcov: float
    err_cov_rfm: float
    err_covrob: float
    err_avrob: float
    err_rfm: float

    @classmethod
    def header(cls):
        return [f.name for f in fields(cls)]

    def values(self):
        return [getattr(self, f.name) for f in fields(self)]


@dataclass
class _CellAccumulator:
    values: list = field(default_factory=list)

    def add(self, row):
        self.values.append(row)

    def mean(self):
        return np.mean(np.array(self.values, dtype=np.float64), axis=0)


def _maybe_shuffle(sample: FunctionalSample, cfg, rep):
    if not cfg.shuffle:
        return sample
    perm = stream(derive_seed(cfg.seed, rep), 9).permutation(sample.n)
    return sample.take(perm)


def run_table23(cfg: ExperimentConfig, p: float | None = None):
    """Six-estimator comparison at one contamination level.

    ``p`` defaults to the first entry of ``cfg.p_list``. Each replicate
    generates one sample of size ``n``; the whole-sample estimates are computed
    once per replicate and shared by all ``m`` cells. Errors are HS distances
    to the true covariance of the central process, averaged over replicates.

    Returns ``(rows, csv_text)`` with one :class:`ExperimentRow` per ``m``.
    """
    if cfg.scenario != "table23":
        raise ValueError("run_table23 needs scenario 'table23'")
    p = cfg.p_list[0] if p is None else float(p)
    log.info("table23: n=%d p=%r alpha=%r T=%d K=%d", cfg.n, p, cfg.alpha, cfg.t_count, cfg.replicates)
    robust = EstimatorKind.robust(cfg.alpha)
    classical = EstimatorKind.classical()
    acc = {m: _CellAccumulator() for m in cfg.m_list}
    for rep in range(cfg.replicates):
        kcfg = KrausConfig(
            n=cfg.n, p=p, t_count=cfg.t_count, seed=derive_seed(cfg.seed, rep),
            fixed_count=cfg.fixed_count,
        )
        sample = _maybe_shuffle(generate(kcfg), cfg, rep)
        truth = true_cov(kcfg)

        t0 = time.perf_counter()
        cov = sample_cov(sample)
        time0_classical = time.perf_counter() - t0
        t0 = time.perf_counter()
        covrob = trimmed_mean(sample, TrimConfig(cfg.alpha), workers=cfg.threads).estimate
        time0 = time.perf_counter() - t0
        log.info("rep %d: time0 robust %.3fs, classical %.3fs", rep, time0, time0_classical)

        for m in cfg.m_list:
            plan = SplitPlan.truncating(sample.n, m)
            part = sample if plan.n == sample.n else sample.take(slice(0, plan.n))
            if plan.n != sample.n:
                log.warning("m=%d: truncating n=%d to %d rows", m, sample.n, plan.n)
            rob = run_fusion(part, plan, robust, FusionKind.DEEPEST, workers=cfg.threads)
            tm = rob.timings
            log.info(
                "rep %d m=%d: time1 %.3fs = split %.4f + blocks %.3f (sum %.3f, max %.4f) + fuse %.4f",
                rep, m, tm["time_total"], tm["time_split"], tm["time_blocks_wall"],
                tm["time_blocks_total"], tm["time_blocks_max"], tm["time_fuse"],
            )
            avrob, _ = fuse_estimates(rob.per_subsample, FusionKind.AVERAGE)
            cls_blocks = [estimate(b, classical) for b in split(part, plan)]
            avcov, _ = fuse_estimates(cls_blocks, FusionKind.AVERAGE)
            cov_rfm, _ = fuse_estimates(cls_blocks, FusionKind.DEEPEST)
            errs = [cov_hs_distance(e, truth) for e in (cov, avcov, cov_rfm, covrob, avrob, rob.fused)]
            acc[m].add([time0, tm["time_total"], *errs])

    rows = []
    for m in cfg.m_list:
        mean = acc[m].mean()
        rows.append(ExperimentRow(cfg.n, m, *[float(v) for v in mean]))
    text = _emit(cfg, ExperimentRow.header(), [r.values() for r in rows])
    return rows, text


# -- median efficiency ----------------------------------------------------

def run_median_eff(cfg: ExperimentConfig):
    """Closed-form vs Monte Carlo variance ratio, Uniform(0, 1) parent.

    Columns: ``k, l, g_theta, ratio_closed, ratio_mc``. The Monte Carlo uses
    ``m = cfg.m_list[0]`` blocks and ``cfg.replicates`` replicates.
    """
    if cfg.scenario != "median_eff":
        raise ValueError("run_median_eff needs scenario 'median_eff'")
    m = cfg.m_list[0]
    header = ["k", "l", "g_theta", "ratio_closed", "ratio_mc"]
    rows = []
    for i, k in enumerate(cfg.k_list):
        law = MedianLaw.uniform(k)
        var_full, var_fused = asymptotic_variances(law, m * law.l, m, theta=0.5)
        ratio_mc = simulate_variance_ratio(k, m, cfg.replicates, seed=derive_seed(cfg.seed, i))
        rows.append([k, law.l, beta_median_pdf(k, 0.5), var_full / var_fused, ratio_mc])
        log.info("median_eff k=%d: closed %.4f mc %.4f", k, rows[-1][3], ratio_mc)
    return header, rows, _emit(cfg, header, rows)
