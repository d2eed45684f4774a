"""Command line entry point: ``robfusion <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .datagen import KrausConfig, generate
from .grid import FunctionalSample
from .harness import load_config, run_median_eff, run_table1, run_table23
from .trimmed import TrimConfig, trimmed_mean

log = logging.getLogger("robfusion")

_SCENARIO = {"table1": "table1", "table23": "table23", "median-eff": "median_eff"}


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key=value file; flags override it")
    p.add_argument("--n", type=int)
    p.add_argument("--m", help="comma-separated subsample counts")
    p.add_argument("--p", help="comma-separated outlier proportions")
    p.add_argument("--alpha", type=float)
    p.add_argument("--t", type=int, help="grid size T")
    p.add_argument("--reps", type=int, help="replicates (K for table23)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output CSV path (stdout if omitted)")
    p.add_argument("--threads", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robfusion", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p1 = sub.add_parser("table1", help="breakdown fractions of median-of-medians fusion")
    _common(p1)
    p1.add_argument("--literal-walk", action="store_true", default=None,
                    help="simulate every Bernoulli indicator instead of block counts")

    p23 = sub.add_parser("table23", help="covariance estimator comparison")
    _common(p23)
    p23.add_argument("--fixed-count", action="store_true", default=None,
                     help="exactly round(p n) outliers instead of Bernoulli(p) flags")
    p23.add_argument("--shuffle", action="store_true", default=None,
                     help="permute rows before splitting into blocks")

    pe = sub.add_parser("median-eff", help="median-of-medians efficiency table")
    _common(pe)
    pe.add_argument("--k", help="comma-separated k values (block length 2k+1)")

    pg = sub.add_parser("gen", help="write a synthetic functional sample")
    pg.add_argument("--n", type=int, required=True)
    pg.add_argument("--p", type=float, default=0.0)
    pg.add_argument("--t", type=int, default=20)
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--fixed-count", action="store_true")
    pg.add_argument("--out", required=True, help=".csv for text, anything else for binary")
    pg.add_argument("--labels", help="labels CSV path (default: <out>.labels.csv)")

    pt = sub.add_parser("trim", help="trimmed covariance estimate of a sample file")
    pt.add_argument("--in", dest="input", required=True)
    pt.add_argument("--alpha", type=float, default=0.25)
    pt.add_argument("--out", required=True, help="bundle CSV (matrix + record line)")
    pt.add_argument("--threads", type=int, default=1)
    return parser


def _experiment(args, scenario):
    overrides = dict(
        scenario=scenario, n=args.n, m=args.m, p=args.p, alpha=args.alpha, t=args.t,
        reps=args.reps, seed=args.seed, out=args.out, threads=args.threads,
    )
    for flag in ("literal_walk", "fixed_count", "shuffle", "k"):
        if hasattr(args, flag):
            overrides[flag] = getattr(args, flag)
    cfg = load_config(args.config, **overrides)
    log.info("config: %s", cfg)
    if scenario == "table1":
        text = run_table1(cfg)[2]
    elif scenario == "median_eff":
        text = run_median_eff(cfg)[2]
    else:
        parts = []
        for p in cfg.p_list:
            _, chunk = run_table23(cfg.replace(output_path=None), p=p)
            parts.append(chunk if not parts else chunk.split("\n", 1)[1])
        text = "".join(parts)
        if cfg.output_path:
            Path(cfg.output_path).write_text(text)
    if not cfg.output_path:
        sys.stdout.write(text)


def _gen(args):
    sample = generate(KrausConfig(n=args.n, p=args.p, t_count=args.t, seed=args.seed,
                                  fixed_count=args.fixed_count))
    out = Path(args.out)
    if out.suffix.lower() == ".csv":
        sample.write_csv(out)
    else:
        sample.save(out)
    sample.write_labels_csv(args.labels or f"{out}.labels.csv")


def _trim(args):
    sample = FunctionalSample.load(args.input)
    res = trimmed_mean(sample, TrimConfig(args.alpha), workers=args.threads)
    res.write_bundle(args.out)
    log.info("trim: %s", res.record())


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command in _SCENARIO:
            _experiment(args, _SCENARIO[args.command])
        elif args.command == "gen":
            _gen(args)
        else:
            _trim(args)
    except (ValueError, ArithmeticError, MemoryError, OSError) as exc:
        print(f"robfusion: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
