"""Confusion matrices, derived metrics, run comparison and curve/report export."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ComparisonError, InputError

CURVE_COLUMNS = ("epoch", "train_loss", "train_acc", "val_loss", "val_acc")


@dataclass(frozen=True)
class ConfusionMatrix:
    """Positive class is fraud (label 1)."""

    tn: int
    fp: int
    fn: int
    tp: int

    @property
    def total(self) -> int:
        return self.tn + self.fp + self.fn + self.tp

    def swapped(self) -> "ConfusionMatrix":
        return ConfusionMatrix(tn=self.tp, fp=self.fn, fn=self.fp, tp=self.tn)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MetricPanel:
    accuracy: float
    precision: float
    recall: float
    f1: float
    mcc: float
    fpr: float
    # names of metrics whose denominator was zero (reported as 0.0)
    degenerate: tuple = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["degenerate"] = list(self.degenerate)
        return d


def confusion(preds, truth) -> ConfusionMatrix:
    preds = np.asarray(preds).astype(int)
    truth = np.asarray(truth).astype(int)
    if preds.shape != truth.shape or preds.ndim != 1:
        raise InputError(f"prediction/truth shapes differ: {preds.shape} vs {truth.shape}")
    if preds.size == 0:
        raise InputError("cannot score an empty prediction set")
    return ConfusionMatrix(
        tn=int(np.sum((preds == 0) & (truth == 0))),
        fp=int(np.sum((preds == 1) & (truth == 0))),
        fn=int(np.sum((preds == 0) & (truth == 1))),
        tp=int(np.sum((preds == 1) & (truth == 1))),
    )


def panel(cm: ConfusionMatrix) -> MetricPanel:
    """Standard binary metrics; any 0/0 is reported as 0 and named in ``degenerate``."""
    if cm.total == 0:
        raise InputError("empty confusion matrix")
    degenerate = []

    def ratio(name, num, den):
        if den == 0:
            degenerate.append(name)
            return 0.0
        return num / den

    accuracy = (cm.tn + cm.tp) / cm.total
    precision = ratio("precision", cm.tp, cm.tp + cm.fp)
    recall = ratio("recall", cm.tp, cm.tp + cm.fn)
    f1 = ratio("f1", 2 * precision * recall, precision + recall)
    fpr = ratio("fpr", cm.fp, cm.fp + cm.tn)
    den = (cm.tp + cm.fp) * (cm.tp + cm.fn) * (cm.tn + cm.fp) * (cm.tn + cm.fn)
    mcc = ratio("mcc", cm.tp * cm.tn - cm.fp * cm.fn, math.sqrt(den))
    return MetricPanel(accuracy, precision, recall, f1, mcc, fpr, tuple(degenerate))


@dataclass(frozen=True)
class DeltaRow:
    name: str
    test_delta: float
    val_delta: float
    train_val_gap: float
    test_delta_rel: float
    val_delta_rel: float

    def to_dict(self) -> dict:
        return asdict(self)


def _rel(value: float, base: float) -> float:
    return 0.0 if base == 0 else 100.0 * (value - base) / base


def compare_runs(results: Sequence[tuple[str, Mapping[str, float]]], baseline: str) -> list[DeltaRow]:
    """Signed differences of each run against ``baseline``.

    ``results`` holds ``(name, {"train": acc, "val": acc, "test": acc})`` with
    accuracies as fractions. Deltas are in percentage points; the ``*_rel``
    columns give the same difference relative to the baseline value, in percent.
    ``train_val_gap`` is the run's own train minus validation accuracy.
    """
    by_name = dict(results)
    if baseline not in by_name:
        raise ComparisonError(f"baseline {baseline!r} not among runs {list(by_name)}")
    base = by_name[baseline]
    rows = []
    for name, acc in results:
        rows.append(DeltaRow(
            name=name,
            test_delta=100.0 * (acc["test"] - base["test"]),
            val_delta=100.0 * (acc["val"] - base["val"]),
            train_val_gap=100.0 * (acc["train"] - acc["val"]),
            test_delta_rel=_rel(acc["test"], base["test"]),
            val_delta_rel=_rel(acc["val"], base["val"]),
        ))
    return rows


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def export_curves(history: Iterable, path) -> Path:
    """Per-epoch curves as CSV (17 significant digits)."""
    rows = list(history)
    if not rows:
        raise InputError("history is empty")
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        for rec in rows:
            w.writerow([_fmt(getattr(rec, c)) for c in CURVE_COLUMNS])
    return path


def read_curves(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return [
            {c: (int(r[c]) if c == "epoch" else float(r[c])) for c in CURVE_COLUMNS}
            for r in csv.DictReader(fh)
        ]


def build_report(config: dict, cm: ConfusionMatrix, deltas: dict | None = None, **extra) -> dict:
    """The JSON report document for one run."""
    doc = {
        "config": config,
        "confusion": cm.to_dict(),
        "metrics": panel(cm).to_dict(),
        "deltas": deltas or {},
    }
    doc.update(extra)
    return doc


def write_json(doc: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path
