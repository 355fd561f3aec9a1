"""Scoring a segmentation against a ground truth.

Only pixels labeled in the ground truth are evaluated; walls and background
are left out of every count.  Each segmented region is paired with the
ground-truth region it overlaps most, and the per-pair confusion counts are
summed into one confusion matrix per map before the Matthews correlation
coefficient is taken.
"""
from __future__ import annotations

import csv
import math
import statistics
from dataclasses import dataclass, field

import numpy as np

from .map_io import LabelImage


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp,
                               self.fn + other.fn, self.tn + other.tn)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class RegionMatch:
    seg_id: int
    gt_id: int | None
    counts: ConfusionCounts


@dataclass
class EvalReport:
    mcc: float
    precision: float
    recall: float
    counts: ConfusionCounts
    per_region: list[RegionMatch] = field(default_factory=list)
    macro_mcc: float | None = None
    n_regions: int = 0


def _arrays(seg, gt) -> tuple[np.ndarray, np.ndarray]:
    s = seg.labels if isinstance(seg, LabelImage) else np.asarray(seg)
    g = gt.labels if isinstance(gt, LabelImage) else np.asarray(gt)
    if s.shape != g.shape:
        raise ValueError(f"dimension mismatch: segmentation {s.shape} vs ground truth {g.shape}")
    return s, g


class _Overlap:
    """Overlap table between segmented and ground-truth ids over labeled gt pixels."""

    def __init__(self, seg, gt):
        s, g = _arrays(seg, gt)
        self.seg_ids = np.unique(s[s > 0])
        self.gt_ids = np.unique(g[g > 0])
        evaluated = g > 0
        self.n_eval = int(evaluated.sum())
        si = np.searchsorted(self.seg_ids, s[evaluated & (s > 0)])
        gi = np.searchsorted(self.gt_ids, g[evaluated & (s > 0)])
        self.table = np.zeros((self.seg_ids.size, self.gt_ids.size), dtype=np.int64)
        np.add.at(self.table, (si, gi), 1)
        # seg areas restricted to evaluated pixels, plus full areas for unmatched regions
        self.seg_area = self.table.sum(axis=1)
        self.seg_full_area = np.bincount(
            np.searchsorted(self.seg_ids, s[s > 0]), minlength=self.seg_ids.size)
        self.gt_area = np.bincount(
            np.searchsorted(self.gt_ids, g[evaluated]), minlength=self.gt_ids.size)

    def best_gt(self, k: int) -> int | None:
        """Column of the best-overlapping gt region for seg row k; ties go to the lower id."""
        row = self.table[k]
        if row.size == 0 or row.max() == 0:
            return None
        return int(np.argmax(row))


def match_regions(seg, gt) -> dict[int, int | None]:
    ov = _Overlap(seg, gt)
    out = {}
    for k, sid in enumerate(ov.seg_ids.tolist()):
        j = ov.best_gt(k)
        out[sid] = None if j is None else int(ov.gt_ids[j])
    return out


def _pair_counts(ov: _Overlap) -> list[RegionMatch]:
    matches = []
    matched_gt = set()
    for k, sid in enumerate(ov.seg_ids.tolist()):
        j = ov.best_gt(k)
        if j is None:
            # nothing in common with any ground-truth room: every pixel is a false positive
            c = ConfusionCounts(0, int(ov.seg_full_area[k]), 0, ov.n_eval)
            matches.append(RegionMatch(sid, None, c))
            continue
        matched_gt.add(j)
        tp = int(ov.table[k, j])
        fp = int(ov.seg_area[k]) - tp
        fn = int(ov.gt_area[j]) - tp
        matches.append(RegionMatch(sid, int(ov.gt_ids[j]), ConfusionCounts(tp, fp, fn, ov.n_eval - tp - fp - fn)))
    for j, gid in enumerate(ov.gt_ids.tolist()):
        if j not in matched_gt:
            fn = int(ov.gt_area[j])
            matches.append(RegionMatch(0, gid, ConfusionCounts(0, 0, fn, ov.n_eval - fn)))
    return matches


def confusion(seg, gt) -> ConfusionCounts:
    """Summed tp/fp/fn/tn over every (segmented, best ground-truth) pair.

    Ground-truth rooms no segmented region was matched to contribute their
    whole area as false negatives.
    """
    total = ConfusionCounts()
    for m in _pair_counts(_Overlap(seg, gt)):
        total = total + m.counts
    return total


def mcc(c: ConfusionCounts) -> float:
    """Matthews correlation coefficient; 0 when any marginal is empty."""
    den = (c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) * (c.tn + c.fn)
    if den == 0:
        return 0.0
    return (c.tp * c.tn - c.fp * c.fn) / math.sqrt(den)


def _mean(values) -> float:
    """Exactly rounded mean, so region order (and hence relabeling) cannot change it."""
    values = [float(v) for v in values]
    return math.fsum(values) / len(values) if values else 0.0


def precision_recall(seg, gt, averaging: str = "gt") -> tuple[float, float]:
    """Maximal-overlap precision and recall.

    Precision is averaged over segmented regions.  Recall is averaged over
    ground-truth regions (``averaging="gt"``, the customary definition) or,
    with ``averaging="seg"``, taken once per segmented region against the
    ground-truth region it is matched to.
    """
    if averaging not in ("gt", "seg"):
        raise ValueError("averaging must be 'gt' or 'seg'")
    ov = _Overlap(seg, gt)
    if ov.gt_ids.size == 0:
        raise ValueError("ground truth has no regions")
    if ov.seg_ids.size == 0:
        return 0.0, 0.0
    best = ov.table.max(axis=1)
    area = np.where(ov.seg_area > 0, ov.seg_area, 1)
    precision = _mean(np.where(ov.seg_area > 0, best / area, 0.0))
    if averaging == "gt":
        recall = _mean(ov.table.max(axis=0) / ov.gt_area)
    else:
        per_seg = []
        for k in range(ov.seg_ids.size):
            j = ov.best_gt(k)
            per_seg.append(0.0 if j is None else ov.table[k, j] / ov.gt_area[j])
        recall = _mean(per_seg)
    return precision, recall


def evaluate(seg, gt, recall_averaging: str = "gt") -> EvalReport:
    ov = _Overlap(seg, gt)
    if ov.gt_ids.size == 0:
        raise ValueError("ground truth has no regions")
    pairs = _pair_counts(ov)
    total = ConfusionCounts()
    for m in pairs:
        total = total + m.counts
    precision, recall = precision_recall(seg, gt, recall_averaging)
    macro = _mean(mcc(m.counts) for m in pairs)
    return EvalReport(
        mcc=mcc(total), precision=precision, recall=recall, counts=total,
        per_region=pairs, macro_mcc=macro, n_regions=int(ov.seg_ids.size),
    )


CSV_COLUMNS = ["path", "regions", "precision", "recall", "tp", "fp", "fn", "tn", "mcc",
               "precision_sd", "recall_sd"]


def report_row(path: str, rep: EvalReport) -> dict:
    c = rep.counts
    return {
        "path": path, "regions": rep.n_regions,
        "precision": f"{rep.precision:.6f}", "recall": f"{rep.recall:.6f}",
        "tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn, "mcc": f"{rep.mcc:.6f}",
        "precision_sd": "", "recall_sd": "",
    }


def summarize(reports: list[EvalReport]) -> dict:
    """Median MCC and mean/sd precision and recall across maps."""
    if not reports:
        raise ValueError("no reports to summarize")
    prec = [r.precision for r in reports]
    rec = [r.recall for r in reports]
    sd = statistics.pstdev
    return {
        "median_mcc": statistics.median(r.mcc for r in reports),
        "precision_mean": statistics.fmean(prec), "precision_sd": sd(prec),
        "recall_mean": statistics.fmean(rec), "recall_sd": sd(rec),
        "maps": len(reports),
    }


def summary_row(summary: dict, reports: list[EvalReport]) -> dict:
    total = ConfusionCounts()
    for r in reports:
        total = total + r.counts
    return {
        "path": "SUMMARY", "regions": sum(r.n_regions for r in reports),
        "precision": f"{summary['precision_mean']:.6f}", "recall": f"{summary['recall_mean']:.6f}",
        "tp": total.tp, "fp": total.fp, "fn": total.fn, "tn": total.tn,
        "mcc": f"{summary['median_mcc']:.6f}",
        "precision_sd": f"{summary['precision_sd']:.6f}", "recall_sd": f"{summary['recall_sd']:.6f}",
    }


def write_csv(rows: list[dict], path_or_file) -> None:
    if hasattr(path_or_file, "write"):
        w = csv.DictWriter(path_or_file, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return
    with open(path_or_file, "w", newline="") as fh:
        write_csv(rows, fh)
