"""Evaluation suite: confusion counts, threshold metrics, ROC/AUC, and
the precision-recall curve with step-interpolated average precision.

The positive class is 1 (food insecure) everywhere; recall on that class
is the metric operators care about most, so the convention is
load-bearing and never inverted.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import jsonfmt
from .data import Dataset, DataError, GROUPS
from .fairness import GroupThresholds, apply_thresholds, demographic_parity_difference
from .model import ModelArtifact, predict_scores


class MetricsError(ValueError):
    """Degenerate evaluation input (empty batch, single class, ...)."""


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total

    @property
    def precision(self) -> float:
        denom = self.tp + self.fp
        return self.tp / denom if denom else 0.0

    @property
    def recall(self) -> float:
        denom = self.tp + self.fn
        return self.tp / denom if denom else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if (p + r) > 0 else 0.0

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


def confusion(y, decisions) -> ConfusionMatrix:
    """Count outcomes with positive class = 1."""
    y = np.asarray(y, dtype=int)
    d = np.asarray(decisions, dtype=int)
    if y.shape != d.shape or y.ndim != 1:
        raise MetricsError(f"shape mismatch: y {y.shape} vs decisions {d.shape}")
    if y.size == 0:
        raise MetricsError("empty evaluation batch")
    return ConfusionMatrix(
        tp=int(((y == 1) & (d == 1)).sum()),
        fp=int(((y == 0) & (d == 1)).sum()),
        tn=int(((y == 0) & (d == 0)).sum()),
        fn=int(((y == 1) & (d == 0)).sum()),
    )


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their mean rank."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values), dtype=float)
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def roc_auc(scores, y) -> float:
    """AUC as the rank statistic: the probability a random positive
    outscores a random negative, ties counting one half."""
    scores = np.asarray(scores, dtype=float)
    y = np.asarray(y, dtype=int)
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise MetricsError("ROC AUC needs both classes present")
    ranks = _average_ranks(scores)
    pos_rank_sum = ranks[y == 1].sum()
    return float((pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def roc_curve(scores, y) -> list[tuple[float, float]]:
    """(fpr, tpr) points at each distinct threshold, descending, with the
    (0, 0) and (1, 1) endpoints included."""
    scores = np.asarray(scores, dtype=float)
    y = np.asarray(y, dtype=int)
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise MetricsError("ROC curve needs both classes present")
    points = [(0.0, 0.0)]
    for t in np.unique(scores)[::-1]:
        d = scores >= t
        tpr = float((d & (y == 1)).sum() / n_pos)
        fpr = float((d & (y == 0)).sum() / n_neg)
        points.append((fpr, tpr))
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))
    return points


def pr_curve(scores, y) -> tuple[list[tuple[float, float, float]], float]:
    """Precision/recall at every distinct threshold (descending) and the
    step-interpolated average precision sum((R_i - R_{i-1}) * P_i)."""
    scores = np.asarray(scores, dtype=float)
    y = np.asarray(y, dtype=int)
    n_pos = int((y == 1).sum())
    if n_pos == 0:
        raise MetricsError("PR curve needs at least one positive label")
    points = []
    ap = 0.0
    prev_recall = 0.0
    for t in np.unique(scores)[::-1]:
        d = scores >= t
        tp = int((d & (y == 1)).sum())
        predicted = int(d.sum())
        precision = tp / predicted  # predicted >= 1: t is an attained score
        recall = tp / n_pos
        points.append((float(t), float(precision), float(recall)))
        ap += (recall - prev_recall) * precision
        prev_recall = recall
    return points, float(ap)


@dataclass(frozen=True)
class EvaluationReport:
    confusion: ConfusionMatrix
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float
    average_precision: float
    parity_gap: float
    roc_points: tuple[tuple[float, float], ...]
    pr_points: tuple[tuple[float, float, float], ...]

    def to_dict(self) -> dict:
        return {
            "confusion": self.confusion.to_dict(),
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "auc": self.auc,
            "average_precision": self.average_precision,
            "parity_gap": self.parity_gap,
            "roc_points": [list(p) for p in self.roc_points],
            "pr_points": [list(p) for p in self.pr_points],
        }


def evaluate(artifact: ModelArtifact, ds_eval: Dataset) -> EvaluationReport:
    """Score a labeled dataset and assemble the full report.

    Decisions use the artifact's calibrated per-group thresholds when
    present, else a uniform 0.5 threshold.
    """
    y = ds_eval.labels()
    groups = ds_eval.groups()
    scored = predict_scores(artifact.params, ds_eval, artifact.featurizer)
    scores = np.array([s for _, s in scored], dtype=float)

    if artifact.thresholds is not None:
        th = GroupThresholds.from_dict(artifact.thresholds)
    else:
        th = GroupThresholds(thresholds={g: 0.5 for g in GROUPS})
    decisions = apply_thresholds(scores, groups, th)

    cm = confusion(y, decisions)
    pr_points, ap = pr_curve(scores, y)
    return EvaluationReport(
        confusion=cm,
        accuracy=cm.accuracy,
        precision=cm.precision,
        recall=cm.recall,
        f1=cm.f1,
        auc=roc_auc(scores, y),
        average_precision=ap,
        parity_gap=demographic_parity_difference(decisions, groups),
        roc_points=tuple(roc_curve(scores, y)),
        pr_points=tuple(pr_points),
    )


def save_report(report: EvaluationReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        jsonfmt.dump(report.to_dict(), fh, indent=2)


def save_curves(report: EvaluationReport, pr_path, roc_path) -> None:
    """Export curve points as CSV for external plotting."""
    with open(pr_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["threshold", "precision", "recall"])
        for t, p, r in report.pr_points:
            writer.writerow([jsonfmt.format_float(t), jsonfmt.format_float(p), jsonfmt.format_float(r)])
    with open(roc_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["fpr", "tpr"])
        for fpr, tpr in report.roc_points:
            writer.writerow([jsonfmt.format_float(fpr), jsonfmt.format_float(tpr)])
