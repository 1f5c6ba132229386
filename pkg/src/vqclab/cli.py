"""
Command line entry point.

Exit codes: 0 success, 2 usage or configuration error, 3 training divergence.
Set ``VQCLAB_LOG`` (DEBUG, INFO, WARNING, ...) to control log output.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import dataprep, metrics, pipeline
from .config import ExperimentConfig, derive_seed
from .errors import DivergenceError, VqcLabError

EXIT_OK, EXIT_USAGE, EXIT_DIVERGED = 0, 2, 3

log = logging.getLogger("vqclab")


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _csv_list(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_values({"seed": args.seed})
    return cfg


def _out_dir(args, cfg: ExperimentConfig) -> Path:
    if args.output:
        return Path(args.output)
    p = Path(cfg["output.dir"])
    return p if p.is_absolute() else cfg.base_dir / p


def cmd_generate(args) -> int:
    ds = dataprep.generate_synthetic(args.legit, args.fraud, args.features, args.difficulty, args.seed)
    out = Path(args.output)
    if out.parent and not out.parent.is_dir():
        raise UsageError(f"output directory does not exist: {out.parent}")
    try:
        dataprep.write_csv(ds, out, args.label_column)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc.strerror}") from None
    legit, fraud = ds.class_counts()
    print(f"{out}: {len(ds)} rows ({legit} legitimate, {fraud} fraudulent), {ds.n_features} features")
    return EXIT_OK


def cmd_select_features(args) -> int:
    cfg = load_config(args)
    if args.csv:
        ds = dataprep.load_csv(args.csv, args.label_column)
    else:
        ds = pipeline.load_dataset(cfg)
    k = args.k or cfg["select.k"]
    train, _ = dataprep.stratified_split(ds, cfg["split.train_fraction"], derive_seed(cfg.seed, "split"))
    scores = dataprep.rf_importance(train, cfg.rf_params())
    chosen = dataprep.select_top_k(scores, k)
    for rank, i in enumerate(sorted(range(len(scores)), key=lambda j: (-scores[j], j)), start=1):
        mark = "*" if i in chosen else " "
        print(f"{mark} {rank:2d}. {ds.feature_names[i]:<16} {scores[i]:.4f}")
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        metrics.write_json(
            {
                "importance": dict(zip(ds.feature_names, map(float, scores))),
                "selected": [ds.feature_names[i] for i in chosen],
                "selected_indices": chosen,
            },
            out / "selection.json",
        )
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = load_config(args)
    out = _out_dir(args, cfg)
    report = pipeline.run_train(cfg, out)
    m = report["metrics"]
    print(
        f"{report['name']}: test accuracy {report['accuracy']['test']:.4f}, "
        f"f1 {m['f1']:.4f}, recall {m['recall']:.4f}, threshold {report['threshold']:.2f}"
    )
    print(f"artifacts in {out / report['name']}")
    return EXIT_OK


def _print_table(rows: list[dict], cells: list[dict]) -> None:
    deltas = {r["name"]: r for r in rows}
    print(f"{'config':<22}{'test acc':>10}{'f1':>8}{'recall':>8}{'mcc':>8}{'d_test pp':>11}{'d_val pp':>10}")
    for c in cells:
        if c["status"] != "ok":
            print(f"{c['name']:<22}  FAILED: {c['error']}")
            continue
        d = deltas.get(c["name"], {})
        m = c["metrics"]
        print(
            f"{c['name']:<22}{c['accuracy']['test']:>10.4f}{m['f1']:>8.4f}{m['recall']:>8.4f}{m['mcc']:>8.4f}"
            f"{d.get('test_delta', float('nan')):>11.2f}{d.get('val_delta', float('nan')):>10.2f}"
        )


def cmd_grid(args) -> int:
    cfg = load_config(args)
    out = _out_dir(args, cfg)
    comparison = pipeline.run_grid(
        cfg, out, encoders=args.encoders, topologies=args.topologies, baseline=args.baseline, jobs=args.jobs
    )
    _print_table(comparison["rows"], comparison["cells"])
    if comparison["comparison_error"]:
        print(f"warning: {comparison['comparison_error']}", file=sys.stderr)
    print(f"comparison written to {out / 'comparison.json'}")
    return EXIT_OK


def cmd_report(args) -> int:
    root = Path(args.directory)
    paths = sorted(root.glob("*/report.json"))
    if not paths:
        raise UsageError(f"no */report.json under {root}")
    reports = [json.loads(p.read_text()) for p in paths]
    cells = [
        {"name": r["name"], "status": r.get("status", "ok"), "accuracy": r["accuracy"], "metrics": r["metrics"]}
        for r in reports
    ]
    baseline = args.baseline or reports[0]["config"].get("grid.baseline", reports[0]["name"])
    rows, problem = pipeline.comparison_rows(reports, baseline)
    _print_table(rows, cells)
    if problem:
        print(f"warning: {problem}", file=sys.stderr)
    if args.output:
        metrics.write_json({"baseline": baseline, "rows": rows, "comparison_error": problem}, Path(args.output))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vqclab", description="Variational quantum classifier laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a seeded synthetic fraud dataset as CSV")
    g.add_argument("--legit", type=_positive, default=1600)
    g.add_argument("--fraud", type=_positive, default=800)
    g.add_argument("--features", type=int, default=8)
    g.add_argument("--difficulty", choices=sorted(dataprep.DIFFICULTY_SEPARATION), default="medium")
    g.add_argument("--seed", type=int, default=42)
    g.add_argument("--label-column", default="label")
    g.add_argument("-o", "--output", required=True, help="CSV path")
    g.set_defaults(func=cmd_generate)

    def common(p):
        p.add_argument("--config", help="experiment config file")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("-o", "--output", help="output directory")

    s = sub.add_parser("select-features", help="rank features by random-forest importance")
    common(s)
    s.add_argument("--csv", help="CSV file (default: data source from the config)")
    s.add_argument("--label-column", default="label")
    s.add_argument("--k", type=_positive)
    s.set_defaults(func=cmd_select_features)

    t = sub.add_parser("train", help="train and evaluate one configuration")
    common(t)
    t.set_defaults(func=cmd_train)

    r = sub.add_parser("grid", help="run the encoder x topology grid")
    common(r)
    r.add_argument("--encoders", type=_csv_list, help="comma list of zz,angle,amplitude")
    r.add_argument("--topologies", type=_csv_list, help="comma list of linear,circular,full")
    r.add_argument("--baseline", help="cell name deltas are measured against (default zz+circular)")
    r.add_argument("--jobs", type=_positive, default=1)
    r.set_defaults(func=cmd_grid)

    p = sub.add_parser("report", help="summarise the run reports in a directory")
    p.add_argument("directory")
    p.add_argument("--baseline")
    p.add_argument("-o", "--output", help="write the comparison JSON here")
    p.set_defaults(func=cmd_report)
    return parser


def _setup_logging() -> None:
    level = os.environ.get("VQCLAB_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DivergenceError as exc:
        print(f"error: training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (VqcLabError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
