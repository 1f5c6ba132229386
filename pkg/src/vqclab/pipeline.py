"""End-to-end runs: prepare data once, train one cell, or sweep the encoder x topology grid."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dataprep, metrics, vqc
from .ansatz import circuit_stats
from .config import ExperimentConfig, derive_seed
from .errors import ComparisonError, VqcLabError
from .featuremaps import Scheme
from .topology import Topology

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PreparedData:
    """Split data restricted to the selected columns, still in raw units."""

    X_train: np.ndarray
    y_train: np.ndarray
    X_val: np.ndarray
    y_val: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    feature_names: tuple
    selected: tuple
    importance: tuple
    scaler: dataprep.ScalerState

    @property
    def selected_names(self) -> list[str]:
        return [self.feature_names[i] for i in self.selected]

    def scaled(self, upper: float):
        """``(scaler, X_train, X_val, X_test)`` mapped onto [0, upper]."""
        sc = self.scaler.with_upper(upper)
        return sc, sc.transform(self.X_train), sc.transform(self.X_val), sc.transform(self.X_test)


def load_dataset(cfg: ExperimentConfig) -> dataprep.Dataset:
    if cfg["data.csv"]:
        return dataprep.load_csv(cfg.csv_path, cfg["data.label_column"])
    return dataprep.generate_synthetic(
        cfg["data.legit"], cfg["data.fraud"], cfg["data.features"], cfg["data.difficulty"], cfg.seed
    )


def prepare_data(cfg: ExperimentConfig, ds: dataprep.Dataset | None = None) -> PreparedData:
    """Split train/val/test, rank features and fit the scaler on the training rows only."""
    ds = load_dataset(cfg) if ds is None else ds
    train_full, test = dataprep.stratified_split(ds, cfg["split.train_fraction"], derive_seed(cfg.seed, "split"))
    train, val = dataprep.stratified_split(
        train_full, 1.0 - cfg["split.val_fraction"], derive_seed(cfg.seed, "val-split")
    )
    k = min(cfg["select.k"], ds.n_features)
    importance = dataprep.rf_importance(train, cfg.rf_params())
    selected = dataprep.select_top_k(importance, k)
    X_tr = train.features[:, selected]
    return PreparedData(
        X_tr, train.labels, val.features[:, selected], val.labels, test.features[:, selected], test.labels,
        ds.feature_names, tuple(selected), tuple(float(v) for v in importance), dataprep.ScalerState.fit(X_tr),
    )


def _accuracy(model: vqc.TrainedModel, X, y) -> float:
    return float(np.mean(model.predict(X) == y))


def run_cell(cfg: ExperimentConfig, data: PreparedData) -> tuple[dict, vqc.TrainedModel]:
    """Train and evaluate one configuration; returns (report document, model)."""
    vcfg = cfg.vqc_config(len(data.selected))
    tcfg = cfg.train_config()
    scaler, X_tr, X_va, X_te = data.scaled(cfg.feature_range)
    log.info("training %s (seed %d)", cfg.cell_name, tcfg.seed)
    model = vqc.train((X_tr, data.y_train), (X_va, data.y_val), vcfg, tcfg)
    model.preprocessing = {
        "selected_features": list(data.selected),
        "selected_names": data.selected_names,
        "scaler": scaler.to_dict(),
    }
    preds = model.predict(X_te)
    cm = metrics.confusion(preds, data.y_test)
    last = model.history[-1]
    report = metrics.build_report(
        cfg.snapshot(),
        cm,
        name=cfg.cell_name,
        status="ok",
        threshold=model.threshold,
        accuracy={
            "train": _accuracy(model, X_tr, data.y_train),
            "val": _accuracy(model, X_va, data.y_val),
            "test": float(np.mean(preds == data.y_test)),
        },
        final_loss={"train": last.train_loss, "val": last.val_loss},
        selected_features=data.selected_names,
        feature_importance=dict(zip(data.feature_names, data.importance)),
        circuit=circuit_stats(vcfg.encoder, vcfg.ansatz),
        n_parameters=vcfg.parameter_count,
        test_size=int(data.y_test.size),
    )
    return report, model


def write_cell(out_dir: Path, report: dict, model: vqc.TrainedModel) -> Path:
    cell_dir = Path(out_dir) / report["name"]
    cell_dir.mkdir(parents=True, exist_ok=True)
    vqc.save_model(model, cell_dir / "model.json")
    metrics.export_curves(model.history, cell_dir / "curves.csv")
    metrics.write_json(report, cell_dir / "report.json")
    return cell_dir


def run_train(cfg: ExperimentConfig, out_dir) -> dict:
    data = prepare_data(cfg)
    report, model = run_cell(cfg, data)
    write_cell(Path(out_dir), report, model)
    return report


def _grid_worker(args):
    cfg, data = args
    try:
        report, model = run_cell(cfg, data)
        return report, model
    except VqcLabError as exc:
        log.warning("cell %s failed: %s", cfg.cell_name, exc)
        return {"name": cfg.cell_name, "status": "failed", "error": f"{type(exc).__name__}: {exc}"}, None


def grid_cells(cfg: ExperimentConfig, encoders=None, topologies=None) -> list[ExperimentConfig]:
    encoders = encoders or cfg.grid_encoders
    topologies = topologies or cfg.grid_topologies
    return [
        cfg.with_values({"encoder.scheme": Scheme.parse(e).value, "ansatz.topology": Topology.parse(t).value})
        for e in encoders
        for t in topologies
    ]


def comparison_rows(reports: list[dict], baseline: str) -> tuple[list[dict], str | None]:
    ok = [(r["name"], r["accuracy"]) for r in reports if r.get("status") == "ok"]
    try:
        return [row.to_dict() for row in metrics.compare_runs(ok, baseline)], None
    except ComparisonError as exc:
        return [], str(exc)


def run_grid(cfg: ExperimentConfig, out_dir, encoders=None, topologies=None, baseline=None, jobs: int = 1) -> dict:
    """Run every (encoder, topology) cell on one shared data preparation.

    A failing cell is recorded in the comparison and does not stop the rest.
    Cell seeds derive from (master seed, cell name), so results do not depend on
    which other cells run or on ``jobs``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    baseline = baseline or cfg["grid.baseline"]
    data = prepare_data(cfg)
    cells = grid_cells(cfg, encoders, topologies)
    work = [(c, data) for c in cells]
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_grid_worker, work))
    else:
        results = [_grid_worker(w) for w in work]

    reports = [r for r, _ in results]
    rows, problem = comparison_rows(reports, baseline)
    deltas = {row["name"]: row for row in rows}
    for report, model in results:
        if model is None:
            continue
        report["deltas"] = {k: v for k, v in deltas.get(report["name"], {}).items() if k != "name"}
        report["deltas"]["baseline"] = baseline
        write_cell(out_dir, report, model)

    comparison = {
        "baseline": baseline,
        "rows": rows,
        "comparison_error": problem,
        "cells": [
            {
                "name": r["name"],
                "status": r["status"],
                **({"error": r["error"]} if r["status"] != "ok" else {
                    "accuracy": r["accuracy"],
                    "confusion": r["confusion"],
                    "metrics": r["metrics"],
                    "threshold": r["threshold"],
                }),
            }
            for r in reports
        ],
        "selected_features": data.selected_names,
    }
    metrics.write_json(comparison, out_dir / "comparison.json")
    return comparison
