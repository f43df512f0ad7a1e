"""``evofis`` command line: ``synth``, ``run`` and ``stats``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, load_config, load_preset, preset_names
from .experiment import DISPLAY_NAMES, run_experiment
from .stats import (
    ExperimentReport,
    IncompleteMatrixError,
    bonferroni_dunn_cd,
    friedman,
    rank_differences,
    rank_problems,
)
from .synth import KINDS, synth_series, write_series_csv
from .timeseries import IngestionError, SchemaError, SplitError, WindowError

USER_ERRORS = (ConfigError, SchemaError, IngestionError, WindowError, SplitError,
               IncompleteMatrixError, ValueError, FileNotFoundError)


def _fmt(x: float) -> str:
    return f"{x:.4f}"


# -- run -----------------------------------------------------------------

def write_predictions(path: Path, report: ExperimentReport, fmt: str = "csv") -> Path:
    actual = np.asarray(report.actuals)
    predicted = np.asarray(report.predictions)
    if fmt == "json":
        path = path.with_suffix(".json")
        rows = [
            {"index": i, "actual": a.tolist(), "predicted": p.tolist()}
            for i, a, p in zip(report.origin_index, actual, predicted)
        ]
        path.write_text(json.dumps(rows) + "\n", encoding="utf-8")
        return path
    m = actual.shape[1]
    if m == 1:
        header = ["index", "actual", "predicted"]
    else:
        header = ["index", *(f"actual_{j + 1}" for j in range(m)), *(f"predicted_{j + 1}" for j in range(m))]
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, a, p in zip(report.origin_index, actual, predicted):
            w.writerow([i, *map(repr, a.tolist()), *map(repr, p.tolist())])
    return path


def cmd_run(args) -> int:
    cfg = load_preset(args.preset) if args.preset else load_config(args.config)
    out = Path(args.output) if args.output else cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    series = cfg.load_series()
    manifest = {
        "config_hash": cfg.config_hash,
        "problem": cfg.problem,
        "library_version": __version__,
        "frozen": bool(args.freeze),
        "runs": [],
    }
    for spec in cfg.algorithms:
        t0 = time.perf_counter()
        report = run_experiment(series, cfg.window, spec.name, spec.params,
                                problem=cfg.problem, freeze=args.freeze, units=cfg.units)
        elapsed = time.perf_counter() - t0
        stem = f"{cfg.problem}_{spec.name}"
        report_path = out / f"{stem}.json"
        report.write(report_path)
        pred_path = write_predictions(out / f"{stem}_predictions.csv", report, args.format)
        manifest["runs"].append({
            "algorithm": report.algorithm,
            "report": report_path.name,
            "predictions": pred_path.name,
            "seconds": round(elapsed, 3),
        })
        print(f"{cfg.problem:<6} {report.algorithm:<6} RMSE {_fmt(report.rmse)}  "
              f"NDEI {_fmt(report.ndei)}  RULES {report.final_rule_count}")
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return 0


# -- stats ---------------------------------------------------------------

def read_score_matrix(path):
    """``problem,<alg1>,<alg2>,...`` CSV into (scores, algorithms, problems)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], [r for r in rows[1:] if r]
    algorithms = header[1:]
    problems, scores, missing = [], [], []
    for r in body:
        problems.append(r[0])
        row = []
        for j, alg in enumerate(algorithms):
            cell = r[j + 1].strip() if j + 1 < len(r) else ""
            if cell == "":
                missing.append(f"{r[0]}/{alg}")
                row.append(np.nan)
            else:
                row.append(float(cell))
        scores.append(row)
    if missing:
        raise IncompleteMatrixError(f"missing cells: {', '.join(missing)}")
    return np.array(scores), algorithms, problems


def collect_reports(paths, metric: str = "rmse"):
    cells = {}
    for p in paths:
        r = ExperimentReport.read(p)
        cells[(r.problem, r.algorithm)] = getattr(r, metric)
    problems = sorted({p for p, _ in cells})
    order = list(DISPLAY_NAMES.values())
    algorithms = sorted({a for _, a in cells}, key=lambda a: (order.index(a) if a in order else len(order), a))
    missing = [f"{p}/{a}" for p in problems for a in algorithms if (p, a) not in cells]
    if missing:
        raise IncompleteMatrixError(f"missing cells: {', '.join(missing)}")
    scores = np.array([[cells[(p, a)] for a in algorithms] for p in problems])
    return scores, algorithms, problems


def statistics_summary(scores, algorithms, problems) -> dict:
    table = rank_problems(scores, algorithms=algorithms, problems=problems)
    n, k = table.ranks.shape
    out = {
        "algorithms": list(algorithms),
        "problems": list(problems),
        "ranks": table.ranks.tolist(),
        "average_ranks": table.average_ranks.tolist(),
        "rank_differences": rank_differences(table),
        "critical_difference": {str(a): bonferroni_dunn_cd(k, n, a) for a in (0.05, 0.01)},
        "friedman": None,
    }
    if n >= 2:
        f = friedman(table)
        out["friedman"] = {
            "q": f.q,
            "df": f.df,
            "critical_values": {str(a): c for a, c in f.critical_values.items()},
            "reject_null": {str(a): r for a, r in f.reject_null.items()},
            "exact": f.exact,
        }
    return out


def write_rank_tables(out: Path, summary: dict) -> None:
    algs = summary["algorithms"]
    with (out / "ranks.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["problem", *algs])
        for p, row in zip(summary["problems"], summary["ranks"]):
            w.writerow([p, *(f"{x:g}" for x in row)])
        w.writerow(["Avg Rank", *(_fmt(x) for x in summary["average_ranks"])])
    with (out / "rank_differences.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["item", "value"])
        for alg, d in summary["rank_differences"].items():
            w.writerow([alg, _fmt(d)])
        for a, cd in summary["critical_difference"].items():
            w.writerow([f"Critical difference (Bonferroni-Dunn) alpha={a}", _fmt(cd)])


def cmd_stats(args) -> int:
    if args.scores:
        scores, algorithms, problems = read_score_matrix(args.scores)
    elif args.reports:
        scores, algorithms, problems = collect_reports(args.reports, args.metric)
    else:
        raise ValueError("give report files or --scores <matrix.csv>")
    summary = statistics_summary(scores, algorithms, problems)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    write_rank_tables(out, summary)
    if args.format == "json":
        (out / "statistics.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")

    print("average ranks: " + ", ".join(f"{a} {_fmt(r)}" for a, r in zip(algorithms, summary["average_ranks"])))
    f = summary["friedman"]
    if f is None:
        print("Friedman test refused: needs N >= 2 problems", file=sys.stderr)
    else:
        label = "exact" if f["exact"] else "chi-square approximation"
        verdicts = ", ".join(
            f"alpha={a}: crit {c:g} -> {'reject' if f['reject_null'][a] else 'keep'}"
            for a, c in f["critical_values"].items()
        )
        print(f"Friedman Q = {_fmt(f['q'])} (df {f['df']}, {label}; {verdicts})")
    for a, cd in summary["critical_difference"].items():
        print(f"Bonferroni-Dunn CD (alpha={a}) = {_fmt(cd)}")
    return 0


# -- synth ---------------------------------------------------------------

def cmd_synth(args) -> int:
    minimum = args.nu + args.gamma + 10
    if args.length < minimum:
        raise ValueError(f"length must be at least nu + gamma + 10 = {minimum}")
    series, meta = synth_series(args.kind, args.length, args.noise, args.seed,
                                args.period, args.covariate)
    path = write_series_csv(args.output, series, meta)
    print(f"wrote {len(series)} samples to {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="evofis", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write a deterministic synthetic series to CSV")
    s.add_argument("--kind", choices=KINDS, required=True)
    s.add_argument("--length", type=int, default=2000)
    s.add_argument("--noise", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--period", type=int, default=24, help="daily cycle length in samples")
    s.add_argument("--covariate", action="store_true", help="add a temperature column")
    s.add_argument("--nu", type=int, default=4)
    s.add_argument("--gamma", type=int, default=1)
    s.add_argument("--output", required=True)
    s.set_defaults(func=cmd_synth)

    r = sub.add_parser("run", help="train and evaluate the configured learners")
    g = r.add_mutually_exclusive_group(required=True)
    g.add_argument("--config", help="experiment config JSON")
    g.add_argument("--preset", choices=preset_names(), help="shipped benchmark preset")
    r.add_argument("--output", help="output directory (overrides config output_dir)")
    r.add_argument("--freeze", action="store_true", help="no adaptation during the test stream")
    r.add_argument("--format", choices=("csv", "json"), default="csv", help="predictions file format")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("stats", help="rank tables, Friedman test and Bonferroni-Dunn CD")
    t.add_argument("reports", nargs="*", help="ExperimentReport JSON files")
    t.add_argument("--scores", help="problem x algorithm score matrix CSV")
    t.add_argument("--metric", choices=("rmse", "ndei"), default="rmse")
    t.add_argument("--output", default=".")
    t.add_argument("--format", choices=("csv", "json"), default="csv")
    t.set_defaults(func=cmd_stats)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except USER_ERRORS as exc:
        print(f"evofis {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
