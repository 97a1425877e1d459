"""Segmentation evaluation metrics over binary masks.

Undefined ratios (empty denominators) resolve to 1.0 by convention and
are recorded in the report's ``conventions`` field rather than applied
silently. MAE is computed on the continuous probabilities, not the
binarized prediction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DataError

__all__ = [
    "ConfusionCounts",
    "MetricReport",
    "binarize",
    "confusion",
    "report",
    "aggregate_reports",
]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def as_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


@dataclass(frozen=True)
class MetricReport:
    """Per-image (or aggregated) metric bundle.

    ``conventions`` names the metrics whose denominator was empty and
    whose value is the documented convention rather than a ratio.
    """

    dsc: float
    accuracy: float
    mae: float
    sensitivity: float
    specificity: float
    precision: float
    counts: ConfusionCounts
    conventions: tuple[str, ...] = field(default=())

    def as_dict(self) -> dict:
        d = {
            "dsc": self.dsc,
            "accuracy": self.accuracy,
            "mae": self.mae,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "precision": self.precision,
            "conventions": list(self.conventions),
        }
        d.update(self.counts.as_dict())
        return d


def binarize(p: np.ndarray, threshold: float = 0.5) -> np.ndarray:
    """Threshold probabilities into a {0,1} mask; the boundary is inclusive."""
    if not (0.0 < threshold < 1.0):
        raise ValueError("threshold must lie in (0, 1)")
    p = np.asarray(p, dtype=np.float64)
    return (p >= threshold).astype(np.uint8)


def _checked_mask(m, name) -> np.ndarray:
    arr = np.asarray(m)
    if not np.isin(arr, (0, 1)).all():
        raise DataError(f"{name} values must be 0 or 1")
    return arr.astype(np.uint8)


def confusion(pred: np.ndarray, truth: np.ndarray) -> ConfusionCounts:
    """Pixel confusion counts between a predicted and a true mask."""
    pred = _checked_mask(pred, "prediction mask")
    truth = _checked_mask(truth, "truth mask")
    if pred.shape != truth.shape:
        raise DataError(f"shape mismatch: prediction {pred.shape} vs truth {truth.shape}")
    tp = int(np.sum((pred == 1) & (truth == 1)))
    fp = int(np.sum((pred == 1) & (truth == 0)))
    tn = int(np.sum((pred == 0) & (truth == 0)))
    fn = int(np.sum((pred == 0) & (truth == 1)))
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def _ratio(num: int, den: int, name: str, conventions: list[str]) -> float:
    if den == 0:
        conventions.append(name)
        return 1.0
    return num / den


def report(counts: ConfusionCounts, p: np.ndarray, truth: np.ndarray) -> MetricReport:
    """Full metric bundle from confusion counts plus the raw maps (for MAE)."""
    p = np.asarray(p, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if p.shape != truth.shape:
        raise DataError(f"shape mismatch: prediction {p.shape} vs truth {truth.shape}")
    if counts.total != p.size:
        raise DataError("confusion counts do not cover the pixel grid")

    conventions: list[str] = []
    dsc = _ratio(2 * counts.tp, 2 * counts.tp + counts.fp + counts.fn, "dsc", conventions)
    sensitivity = _ratio(counts.tp, counts.tp + counts.fn, "sensitivity", conventions)
    specificity = _ratio(counts.tn, counts.tn + counts.fp, "specificity", conventions)
    precision = _ratio(counts.tp, counts.tp + counts.fp, "precision", conventions)
    accuracy = (counts.tp + counts.tn) / counts.total
    mae = float(np.mean(np.abs(p - truth)))
    return MetricReport(
        dsc=dsc,
        accuracy=accuracy,
        mae=mae,
        sensitivity=sensitivity,
        specificity=specificity,
        precision=precision,
        counts=counts,
        conventions=tuple(conventions),
    )


def aggregate_reports(reports: Sequence[MetricReport], mode: str = "macro") -> MetricReport:
    """Combine per-image reports.

    macro: each metric averaged over images (the reporting default).
    micro: counts pooled first, ratios recomputed; MAE weighted by pixels.
    """
    if not reports:
        raise DataError("no reports to aggregate")
    counts = ConfusionCounts(
        tp=sum(r.counts.tp for r in reports),
        fp=sum(r.counts.fp for r in reports),
        tn=sum(r.counts.tn for r in reports),
        fn=sum(r.counts.fn for r in reports),
    )
    conventions = tuple(sorted({name for r in reports for name in r.conventions}))
    if mode == "macro":
        n = len(reports)
        return MetricReport(
            dsc=sum(r.dsc for r in reports) / n,
            accuracy=sum(r.accuracy for r in reports) / n,
            mae=sum(r.mae for r in reports) / n,
            sensitivity=sum(r.sensitivity for r in reports) / n,
            specificity=sum(r.specificity for r in reports) / n,
            precision=sum(r.precision for r in reports) / n,
            counts=counts,
            conventions=conventions,
        )
    if mode == "micro":
        conv: list[str] = []
        dsc = _ratio(2 * counts.tp, 2 * counts.tp + counts.fp + counts.fn, "dsc", conv)
        sensitivity = _ratio(counts.tp, counts.tp + counts.fn, "sensitivity", conv)
        specificity = _ratio(counts.tn, counts.tn + counts.fp, "specificity", conv)
        precision = _ratio(counts.tp, counts.tp + counts.fp, "precision", conv)
        total_px = sum(r.counts.total for r in reports)
        mae = sum(r.mae * r.counts.total for r in reports) / total_px
        return MetricReport(
            dsc=dsc,
            accuracy=(counts.tp + counts.tn) / counts.total,
            mae=mae,
            sensitivity=sensitivity,
            specificity=specificity,
            precision=precision,
            counts=counts,
            conventions=tuple(conv),
        )
    raise ValueError(f"unknown aggregation mode: {mode!r}")
