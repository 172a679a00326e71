"""Command-line interface: ``clustcv {select,wold,simulate,verify,elbow,benchmark}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .datasets import BENCHMARKS, PUBLISHED_K
from .errors import ClustCVError
from .evaluation import summary_csv
from .experiments import (
    METHODS,
    benchmark_selections,
    grid_points,
    modal_k,
    simulate,
    verify_single_cluster,
    verify_two_cluster,
)
from .gabriel import gabriel_select_k, gabriel_select_k_corrected
from .kmeans import KMeansParams, dispersion_curve
from .matrix import DataMatrix
from .simgen import SimSpec, make_spec
from .wold import wold_select_k

log = logging.getLogger("clustcv")


def _g(v: float) -> str:
    return f"{v:.6g}"


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, output) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _k_grid(args):
    if args.k_min < 1 or args.k_max < args.k_min:
        raise ClustCVError(f"invalid k range {args.k_min}..{args.k_max}")
    return tuple(range(args.k_min, args.k_max + 1))


def _params(args) -> KMeansParams:
    return KMeansParams(restarts=args.restarts, max_iter=args.max_iter)


def _report_rows(report, stage1=None):
    means = report.mean_error
    chosen = report.selected_k
    rows = []
    for k in report.k_grid:
        row = [k]
        if stage1 is not None:
            row.append(_g(stage1.mean_error[k]))
        row += [_g(means[k]), int(k == chosen)]
        rows.append(row)
    return rows


def cmd_select(args) -> int:
    data = DataMatrix.from_csv(args.input)
    grid = _k_grid(args)
    if args.corrected:
        res = gabriel_select_k_corrected(data, grid, args.row_folds, args.col_folds, _params(args),
                                         args.seed, threads=args.threads)
        report, stage1 = res.report, res.report0
    else:
        report = gabriel_select_k(data, grid, args.row_folds, args.col_folds, _params(args),
                                  args.seed, threads=args.threads)
        stage1 = None
    for w in report.warnings:
        log.warning("%s", w)
    if args.format == "json":
        doc = {"seed": args.seed, "input": str(args.input), "selected_k": report.selected_k,
               "report": report.to_dict()}
        if stage1 is not None:
            doc["stage1"] = stage1.to_dict()
        text = json.dumps(doc, indent=2) + "\n"
    elif args.long:
        text = report.to_csv()
    else:
        header = ["k", "stage1_mean_cv_error", "mean_cv_error", "selected"] if stage1 is not None \
            else ["k", "mean_cv_error", "selected"]
        text = _table(header, _report_rows(report, stage1))
    _emit(text, args.output)
    if args.output:
        print(f"selected_k={report.selected_k} seed={args.seed}")
    return 0


def cmd_wold(args) -> int:
    data = DataMatrix.from_csv(args.input)
    report = wold_select_k(data, _k_grid(args), params=_params(args), rng=args.seed,
                           folds=args.folds, holdout_fraction=args.holdout_fraction, threads=args.threads)
    if args.format == "json":
        text = json.dumps({"seed": args.seed, "input": str(args.input), "selected_k": report.selected_k,
                           "report": report.to_dict()}, indent=2) + "\n"
    elif args.long:
        text = report.to_csv()
    else:
        text = _table(["k", "mean_cv_error", "selected"], _report_rows(report))
    _emit(text, args.output)
    if args.output:
        print(f"selected_k={report.selected_k} seed={args.seed}")
    return 0


def _load_spec(args) -> SimSpec:
    if args.config:
        doc = json.loads(Path(args.config).read_text())
        spec = SimSpec.from_dict(doc.get("spec", doc))
        if args.replicates is None and "replicates" in doc:
            args.replicates = int(doc["replicates"])
    else:
        if not args.setting:
            raise ClustCVError("simulate needs --config or --setting")
        spec = make_spec(args.setting, args.value)
    if args.seed is not None:
        spec = spec.with_seed(args.seed)
    return spec


def cmd_simulate(args) -> int:
    spec = _load_spec(args)
    replicates = 20 if args.replicates is None else args.replicates
    if replicates < 0:
        raise ClustCVError("replicates must be >= 0")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    rows = simulate(spec, replicates, methods, k_grid=_k_grid(args), K=args.row_folds, L=args.col_folds,
                    params=_params(args), threads=args.threads)
    if args.format == "json":
        text = json.dumps({"spec": json.loads(spec.to_json()), "replicates": replicates,
                           "rows": [r.__dict__ for r in rows]}, indent=2) + "\n"
    else:
        text = summary_csv(rows)
    _emit(text, args.output)
    return 0


def cmd_verify(args) -> int:
    rhos = [float(v) for v in args.rho.split(",")]
    results = verify_single_cluster(rhos, args.reps, args.n, args.seed)
    points = grid_points(args.grid_step, 0.0, args.grid_max, args.margin)
    results += verify_two_cluster(points, args.reps, args.n, args.seed, args.threshold)
    rows = [[r.experiment, r.point, r.expected, r.agree, r.total, _g(r.rate), "pass" if r.passed else "fail"]
            for r in results]
    text = _table(["experiment", "point", "expected", "agree", "total", "rate", "status"], rows)
    _emit(text, args.output)
    return 0


def cmd_elbow(args) -> int:
    data = DataMatrix.from_csv(args.input)
    k_max = min(args.k_max, data.n_rows)
    curve = dispersion_curve(data, k_max, args.restarts, args.seed, args.max_iter)
    if curve.nonmonotone:
        log.warning("W_k increased at k=%s", ",".join(map(str, curve.nonmonotone)))
    text = _table(["k", "W_k"], [[k, _g(w)] for k, w in curve.points])
    _emit(text, args.output)
    return 0


def cmd_benchmark(args) -> int:
    names = BENCHMARKS if args.datasets == "all" else tuple(args.datasets.split(","))
    seeds = list(range(args.seed, args.seed + args.seeds))
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    rows = []
    for name in names:
        picks = benchmark_selections(name, seeds, methods, _k_grid(args), _params(args), args.threads)
        for m in methods:
            mode = modal_k(picks[m])
            want = PUBLISHED_K[name][m]
            rows.append([name, m, " ".join(map(str, picks[m])), mode, want, "match" if mode == want else "differ"])
    text = _table(["dataset", "method", "selections", "modal_k", "published_k", "status"], rows)
    _emit(text, args.output)
    return 0


def _common(p, *, folds=True):
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, default=10)
    if folds:
        p.add_argument("--row-folds", type=int, default=5)
        p.add_argument("--col-folds", type=int, default=2)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--output", "-o", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="clustcv", description="Choose the number of k-means clusters by cross-validation.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="Gabriel cross-validation on a CSV matrix")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--corrected", action="store_true", help="whiten by the estimated noise covariance first")
    p.add_argument("--long", action="store_true", help="emit per-fold errors instead of the per-k table")
    _common(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("wold", help="speckled-holdout cross-validation (NA cells allowed)")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--holdout-fraction", type=float, default=None)
    p.add_argument("--long", action="store_true")
    _common(p, folds=False)
    p.set_defaults(func=cmd_wold)

    p = sub.add_parser("simulate", help="selection frequencies over simulated replicates")
    p.add_argument("--config", "-c", default=None, help="JSON SimSpec, optionally wrapped as {spec, replicates}")
    p.add_argument("--setting", choices=("correlated", "noise_dims", "high_dim", "var_hetero", "heavy_tail"))
    p.add_argument("--value", type=float, default=None, help="swept parameter value for --setting")
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--seed", type=int, default=None)
    _common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="compare single-fold simulations with the closed-form predictions")
    p.add_argument("--rho", default="0,0.2,0.4,0.6,0.8")
    p.add_argument("--n", type=int, default=20000)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--grid-step", type=float, default=0.5)
    p.add_argument("--grid-max", type=float, default=3.0)
    p.add_argument("--margin", type=float, default=0.5)
    p.add_argument("--threshold", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("elbow", help="within-cluster dispersion W_k for k = 1..k_max")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--k-max", type=int, default=10)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_elbow)

    p = sub.add_parser("benchmark", help="modal selections on the bundled datasets")
    p.add_argument("--datasets", default="all")
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--methods", default=",".join(METHODS))
    _common(p, folds=False)
    p.set_defaults(func=cmd_benchmark)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ClustCVError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
