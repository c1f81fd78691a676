"""Detection and segmentation metrics for few-pixel target masks.

Scores work at two levels. Pixel level: IoU between a predicted and a true
mask. Target level: predicted connected components are matched one-to-one
against ground-truth instances (greedy nearest-centroid, a pair qualifies
when the centroid distance is within match_radius or the masks overlap),
then Pd counts matched targets and Fa counts the pixels of unmatched
predicted components against the background pixel total.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .mask import EmptyMaskError, Mask, mask_geometry

__all__ = [
    "PixelConfusion",
    "DetectionTally",
    "MetricsReport",
    "iou",
    "pixel_confusion",
    "miou",
    "match_components",
    "pd_fa",
    "geometry_errors",
    "components_of",
    "evaluate_dataset",
    "report_to_json",
    "report_to_csv",
]

DEFAULT_MATCH_RADIUS = 3.0


@dataclass(frozen=True)
class PixelConfusion:
    tp: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be >= 0")


@dataclass(frozen=True)
class DetectionTally:
    """Dataset-level detection counts."""

    n_tp: int  # matched ground-truth targets
    n_total: int  # ground-truth targets
    n_fp_pixels: int  # pixels of unmatched predicted components
    n_bg_pixels: int  # total pixels minus ground-truth foreground

    def __post_init__(self):
        if self.n_tp > self.n_total:
            raise ValueError(f"n_tp {self.n_tp} > n_total {self.n_total}")
        if self.n_fp_pixels > self.n_bg_pixels:
            raise ValueError("more false-alarm pixels than background pixels")

    @property
    def pd(self) -> float:
        return self.n_tp / self.n_total if self.n_total else 1.0

    @property
    def fa(self) -> float:
        return self.n_fp_pixels / self.n_bg_pixels if self.n_bg_pixels else 0.0


def _check_dims(a: Mask, b: Mask) -> None:
    if (a.width, a.height) != (b.width, b.height):
        raise ValueError(
            f"mask dimensions differ: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def pixel_confusion(pred: Mask, gt: Mask) -> PixelConfusion:
    _check_dims(pred, gt)
    p, g = pred.pixels, gt.pixels
    return PixelConfusion(
        tp=int(np.count_nonzero(p & g)),
        fp=int(np.count_nonzero(p & ~g)),
        fn=int(np.count_nonzero(~p & g)),
    )


def iou(pred: Mask, gt: Mask) -> float:
    """Intersection over union; two empty masks agree perfectly (1.0)."""
    c = pixel_confusion(pred, gt)
    union = c.tp + c.fp + c.fn
    return c.tp / union if union else 1.0


def miou(pairs: list[tuple[Mask | None, Mask]]) -> float:
    """Mean per-instance IoU; an unmatched instance (pred None) scores 0."""
    if not pairs:
        raise ValueError("miou of an empty pair list is undefined")
    total = 0.0
    for pred, gt in pairs:
        if pred is not None:
            total += iou(pred, gt)
    return total / len(pairs)


def match_components(
    preds: list[Mask], gts: list[Mask], match_radius: float = DEFAULT_MATCH_RADIUS
) -> tuple[list[int | None], list[int]]:
    """One-to-one greedy matching of predicted components to GT instances.

    A (pred, gt) pair is admissible when their centroids lie within
    match_radius or the masks share a pixel. Admissible pairs are taken in
    order of increasing centroid distance, each side used at most once.
    Returns (per-GT matched pred index or None, unmatched pred indices).
    """
    for m in preds:
        if gts:
            _check_dims(m, gts[0])
    cand: list[tuple[float, int, int]] = []
    gt_geo = [mask_geometry(g) for g in gts]
    for pi, p in enumerate(preds):
        pg = mask_geometry(p)
        for gi, g in enumerate(gts):
            d = math.dist(pg.centroid, gt_geo[gi].centroid)
            if d <= match_radius or np.any(p.pixels & g.pixels):
                cand.append((d, pi, gi))
    cand.sort()
    assigned: list[int | None] = [None] * len(gts)
    used_pred: set[int] = set()
    for _, pi, gi in cand:
        if pi in used_pred or assigned[gi] is not None:
            continue
        assigned[gi] = pi
        used_pred.add(pi)
    unmatched = [pi for pi in range(len(preds)) if pi not in used_pred]
    return assigned, unmatched


def pd_fa(
    preds: list[list[Mask]],
    gts: list[list[Mask]],
    match_radius: float = DEFAULT_MATCH_RADIUS,
    image_sizes: list[tuple[int, int]] | None = None,
) -> DetectionTally:
    """Target-level detection tally over a dataset.

    preds[i]/gts[i] hold the predicted components and GT instances of
    image i. image_sizes supplies (width, height) per image when an image
    may carry no masks at all; otherwise sizes are taken from the masks.
    """
    if len(preds) != len(gts):
        raise ValueError(f"{len(preds)} prediction lists vs {len(gts)} GT lists")
    if image_sizes is not None and len(image_sizes) != len(preds):
        raise ValueError("image_sizes length mismatch")
    n_tp = n_total = n_fp_px = 0
    total_px = gt_px = 0
    for i, (ps, gs) in enumerate(zip(preds, gts)):
        if image_sizes is not None:
            w, h = image_sizes[i]
        elif ps or gs:
            first = (ps or gs)[0]
            w, h = first.width, first.height
        else:
            continue
        for m in ps + gs:
            if (m.width, m.height) != (w, h):
                raise ValueError(f"image {i}: mask dimensions differ from {w}x{h}")
        total_px += w * h
        gt_px += sum(g.area for g in gs)
        assigned, unmatched = match_components(ps, gs, match_radius)
        n_total += len(gs)
        n_tp += sum(1 for a in assigned if a is not None)
        n_fp_px += sum(ps[pi].area for pi in unmatched)
    return DetectionTally(
        n_tp=n_tp, n_total=n_total, n_fp_pixels=n_fp_px, n_bg_pixels=total_px - gt_px
    )


def geometry_errors(pred: Mask, gt: Mask) -> tuple[float, float, float]:
    """(area ratio, centroid distance, |equivalent radius difference|)."""
    _check_dims(pred, gt)
    pg, gg = mask_geometry(pred), mask_geometry(gt)
    return (
        pg.area / gg.area,
        math.dist(pg.centroid, gg.centroid),
        abs(pg.equiv_radius - gg.equiv_radius),
    )


def components_of(mask: Mask, connectivity: int = 8) -> list[Mask]:
    """Split a mask into connected components, row-major label order."""
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    structure = np.ones((3, 3), dtype=bool) if connectivity == 8 else None
    labels, n = ndimage.label(mask.pixels, structure=structure)
    return [Mask(labels == k) for k in range(1, n + 1)]


@dataclass
class MetricsReport:
    """Aggregated dataset scores plus the per-instance records behind them."""

    miou: float
    pd: float
    fa: float
    mean_area_ratio: float  # over matched instances
    mean_centroid_error: float
    mean_radius_error: float
    n_targets: int
    n_matched: int
    per_sample: list[dict] = field(default_factory=list)


def evaluate_dataset(
    preds: list[list[Mask]],
    gts: list[list[Mask]],
    match_radius: float = DEFAULT_MATCH_RADIUS,
    image_sizes: list[tuple[int, int]] | None = None,
) -> MetricsReport:
    """Match, then aggregate IoU, detection, and geometry-error metrics.

    Geometry-error means cover matched instances only; an unmatched GT
    instance still drags mIoU down with a zero.
    """
    tally = pd_fa(preds, gts, match_radius, image_sizes)
    records: list[dict] = []
    iou_sum = 0.0
    ar_sum = ce_sum = re_sum = 0.0
    n_matched = 0
    for i, (ps, gs) in enumerate(zip(preds, gts)):
        assigned, _ = match_components(ps, gs, match_radius)
        for gi, pi in enumerate(assigned):
            rec = {"image": i, "target": gi, "matched": pi is not None}
            if pi is None:
                rec.update(iou=0.0, area_ratio=None, centroid_error=None, radius_error=None)
            else:
                v = iou(ps[pi], gs[gi])
                ar, ce, re = geometry_errors(ps[pi], gs[gi])
                iou_sum += v
                ar_sum += ar
                ce_sum += ce
                re_sum += re
                n_matched += 1
                rec.update(iou=v, area_ratio=ar, centroid_error=ce, radius_error=re)
            records.append(rec)
    n_targets = tally.n_total
    return MetricsReport(
        miou=iou_sum / n_targets if n_targets else 1.0,
        pd=tally.pd,
        fa=tally.fa,
        mean_area_ratio=ar_sum / n_matched if n_matched else math.nan,
        mean_centroid_error=ce_sum / n_matched if n_matched else math.nan,
        mean_radius_error=re_sum / n_matched if n_matched else math.nan,
        n_targets=n_targets,
        n_matched=n_matched,
        per_sample=records,
    )


def report_to_json(report: MetricsReport) -> str:
    def clean(v):
        if isinstance(v, float) and math.isnan(v):
            return None
        return v

    obj = {
        "v": 1,
        "miou": report.miou,
        "pd": report.pd,
        "fa": report.fa,
        "mean_area_ratio": clean(report.mean_area_ratio),
        "mean_centroid_error": clean(report.mean_centroid_error),
        "mean_radius_error": clean(report.mean_radius_error),
        "n_targets": report.n_targets,
        "n_matched": report.n_matched,
        "per_sample": report.per_sample,
    }
    return json.dumps(obj, indent=2)


def report_to_csv(report: MetricsReport) -> str:
    """Per-sample records as CSV, one row per GT instance."""
    buf = io.StringIO()
    fields = ["image", "target", "matched", "iou", "area_ratio", "centroid_error", "radius_error"]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for rec in report.per_sample:
        writer.writerow({k: rec.get(k) for k in fields})
    return buf.getvalue()
