"""``tsboot`` command line.

    tsboot run <config.json> [--output-dir DIR] [--fresh-series-per-replicate]
    tsboot ks <a.csv> <b.csv> [--param NAME]
    tsboot simulate {ar1,hetero_ar1,arch} [model options] --n N --seed S --out FILE
    tsboot fit <estimator> <series.csv> [--p P] [--sigma1-sq S1 --sigma2-sq S2]

Results go to stdout as one JSON object.  Failures exit nonzero with a
single JSON line ``{"error": ..., "message": ...}`` on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bootstrap import read_pivots_csv
from .estimators import VARIANTS, ar1_lad, ar1_lse, ar1_wlad, ar1_wlse, arch_fit
from .harness import ExperimentConfig, emit_report, run_experiment
from .parallel import resolve_workers
from .processes import (
    AR1Spec,
    ArchSpec,
    HeteroAR1Spec,
    TauSchedule,
    read_series_csv,
    simulate_ar1,
    simulate_arch,
    simulate_hetero_ar1,
    write_series_csv,
)
from .rand_weights import ErrorDist, RngStream
from .stats import ks_two_sample

AR_FITS = ("lse", "lad", "wlse", "wlad")


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def _read_sample(path: str, param: str | None) -> np.ndarray:
    """Values from a pivot CSV, a series CSV or a one-column CSV with a header."""
    with open(path, newline="") as fh:
        header = next(csv.reader(fh), None)
    if header is None:
        raise ValueError(f"{path} is empty")
    header = [h.strip() for h in header]
    if header == ["replicate", "param", "pivot"]:
        return read_pivots_csv(path, param)
    if header == ["t", "x"]:
        return read_series_csv(path).values
    if len(header) == 1:
        return np.loadtxt(path, skiprows=1, ndmin=1, delimiter=",")
    raise ValueError(f"{path}: unrecognized CSV header {header}")


def cmd_run(args) -> None:
    data = json.loads(Path(args.config).read_text())
    if args.fresh_series_per_replicate:
        data["fresh_series_per_replicate"] = True
    if args.output_dir:
        data["output_dir"] = args.output_dir
    cfg = ExperimentConfig.from_dict(data)
    report = run_experiment(cfg, workers=args.workers)
    files = emit_report(report, cfg.output_dir, tuple(args.format))
    _emit(
        {
            "experiment": cfg.experiment,
            "output_dir": cfg.output_dir,
            "files": len(files),
            "warnings": report.warnings,
            "wall_time_s": round(report.wall_time, 3),
        }
    )


def cmd_ks(args) -> None:
    a = _read_sample(args.a, args.param)
    b = _read_sample(args.b, args.param)
    k = ks_two_sample(a, b)
    _emit({"d_stat": k.d_stat, "p_value": k.p_value, "n1": k.n1, "n2": k.n2})


def cmd_simulate(args) -> None:
    error = ErrorDist.parse(args.error)
    stream = RngStream(args.seed)
    if args.model == "ar1":
        series = simulate_ar1(AR1Spec(args.theta, args.sigma, error), args.n, stream)
    elif args.model == "hetero_ar1":
        if args.sigma1_sq is None or args.sigma2_sq is None:
            raise ValueError("hetero_ar1 needs --sigma1-sq and --sigma2-sq")
        sched = TauSchedule.two_period_variances(args.sigma1_sq, args.sigma2_sq)
        series = simulate_hetero_ar1(HeteroAR1Spec(args.theta, sched, error), args.n, stream)
    else:
        series = simulate_arch(ArchSpec(args.c0, tuple(args.b), error), args.n, stream)
    write_series_csv(series, args.out)
    _emit({"model": args.model, "n": series.n, "seed": args.seed, "out": args.out})


def cmd_fit(args) -> None:
    series = read_series_csv(args.series)
    if args.estimator in AR_FITS:
        if args.estimator in ("wlse", "wlad"):
            if args.sigma1_sq is None or args.sigma2_sq is None:
                raise ValueError(f"{args.estimator} needs --sigma1-sq and --sigma2-sq")
            tau = TauSchedule.two_period_variances(args.sigma1_sq, args.sigma2_sq).taus(series.n)[1:]
            res = (ar1_wlse if args.estimator == "wlse" else ar1_wlad)(series, tau)
        else:
            res = (ar1_lse if args.estimator == "lse" else ar1_lad)(series)
        estimate = {"theta": res.value}
    else:
        res = arch_fit(series, args.p, args.estimator, restarts=args.restarts)
        names = ["c0"] + [f"b{i}" for i in range(1, args.p + 1)]
        estimate = dict(zip(names, map(float, res.estimate)))
    _emit({"estimator": args.estimator, "estimate": estimate, "objective": res.objective, "converged": res.converged})


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tsboot", description="Bootstrap studies for AR(1) and ARCH(p) estimators.")
    ap.add_argument("--version", action="version", version=f"tsboot {__version__}")
    ap.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("config")
    p.add_argument("--output-dir")
    p.add_argument("--fresh-series-per-replicate", action="store_true")
    p.add_argument("--format", nargs="+", choices=("csv", "markdown"), default=["csv", "markdown"])
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("ks", help="two-sample Kolmogorov-Smirnov test of two CSV samples")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--param", help="parameter to compare when a pivot file holds several")
    p.set_defaults(func=cmd_ks)

    p = sub.add_parser("simulate", help="simulate a series to CSV")
    p.add_argument("model", choices=("ar1", "hetero_ar1", "arch"))
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--sigma1-sq", type=float)
    p.add_argument("--sigma2-sq", type=float)
    p.add_argument("--c0", type=float, default=1.0)
    p.add_argument("--b", type=float, nargs="+", default=[0.5])
    p.add_argument("--error", default="normal")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit an estimator to a series CSV")
    p.add_argument("estimator", choices=AR_FITS + VARIANTS)
    p.add_argument("series")
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--sigma1-sq", type=float)
    p.add_argument("--sigma2-sq", type=float)
    p.set_defaults(func=cmd_fit)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        args.workers = resolve_workers(args.threads)
        args.func(args)
    except Exception as exc:  # noqa: BLE001 - every failure becomes one machine-readable line
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
