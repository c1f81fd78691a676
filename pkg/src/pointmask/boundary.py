"""Closed-form model of when energy-guided growth admits a finite peak.

The growth engine stops where the scored energy attains its maximum; whether a
finite maximum exists at all is predicted by a small analytic model of the
per-step energy increment.  Absorbing the n-th pixel changes the three energy
terms approximately by

    gain = 1 / (n ln n)               size reward, positive but vanishing
    stat = -dmu^2 / (2 n sigma_T^2)   contrast/homogeneity resistance
    geo  = -1 / (2 pi R_s^2)          constant distance-prior resistance

with dmu the target-over-background excess mean and sigma_T the in-target
standard deviation.  Setting the total increment to zero and solving for the
contrast yields a detectability threshold

    B(n, gamma, R_s) = (1/gamma) * sqrt(2 n * max(0, 1/(n ln n) - 1/(2 pi R_s^2)))

with gamma = sigma_B / sigma_T: targets whose signal-to-clutter ratio exceeds
B are predicted to stop growing at a finite size, those below it to grow
without a profitable stopping point.  The satisfaction ratio rho = SCR / B
compresses this into a single per-target score; empirical validation buckets
targets by rho and checks that mask quality rises with it.

All functions here are pure scalar/array math; nothing touches images.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "DEFAULT_BUCKET_EDGES",
    "IncrementModel",
    "IncrementTerms",
    "TargetRecord",
    "BucketStat",
    "BoundaryReport",
    "Prop1Scan",
    "increment_terms",
    "boundary_b",
    "satisfaction_ratio",
    "proposition1_scan",
    "bucketed_validation",
    "boundary_report_to_json",
    "boundary_report_to_csv",
]

# Edges of the rho buckets: left-open, right-closed intervals
# (0, 0.5], (0.5, 1], (1, 1.5], (1.5, 2], (2, inf].  The infinite sentinel
# produced when B = 0 lands in the top bucket.
DEFAULT_BUCKET_EDGES: tuple[float, ...] = (0.0, 0.5, 1.0, 1.5, 2.0, math.inf)


@dataclass(frozen=True)
class IncrementModel:
    """Inputs of the per-step increment approximation.

    n               region size after the step, >= 2
    delta_mu        mu_T - mu_B, the raw contrast (may be zero)
    sigma_t_region  in-target standard deviation, > 0
    r_s             support radius of the distance prior, > 0
    """

    n: int
    delta_mu: float
    sigma_t_region: float
    r_s: float

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if not self.sigma_t_region > 0:
            raise ValueError(f"sigma_t_region must be > 0, got {self.sigma_t_region}")
        if not self.r_s > 0:
            raise ValueError(f"r_s must be > 0, got {self.r_s}")


class IncrementTerms(NamedTuple):
    gain: float
    stat_resistance: float
    geo_resistance: float
    total: float


def increment_terms(m: IncrementModel) -> IncrementTerms:
    """Approximate energy change from absorbing the n-th pixel, per term."""
    gain = 1.0 / (m.n * math.log(m.n))
    stat = -(m.delta_mu**2) / (2.0 * m.n * m.sigma_t_region**2)
    geo = -1.0 / (2.0 * math.pi * m.r_s**2)
    return IncrementTerms(gain, stat, geo, gain + stat + geo)


def boundary_b(n: int, gamma: float, r_s: float) -> float:
    """Minimum signal-to-clutter ratio for a finite growth peak to exist.

    B = (1/gamma) * sqrt(2 n * max(0, 1/(n ln n) - 1/(2 pi R_s^2))).
    B = 0 means even zero-contrast targets stop growing: the size reward at
    this n is already beaten by the distance prior alone.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    if not r_s > 0:
        raise ValueError(f"r_s must be > 0, got {r_s}")
    inner = 1.0 / (n * math.log(n)) - 1.0 / (2.0 * math.pi * r_s**2)
    return math.sqrt(2.0 * n * max(0.0, inner)) / gamma


def satisfaction_ratio(scr: float, b: float) -> float:
    """rho = scr / B; infinite when B = 0 (threshold vacuously met)."""
    if b < 0:
        raise ValueError(f"b must be >= 0, got {b}")
    if b == 0.0:
        return math.inf
    return scr / b


@dataclass(frozen=True)
class Prop1Scan:
    """Result of sweeping the increment model over region sizes.

    n0         first size from which the modeled increment stays negative
               through the end of the sweep; None when the increment is still
               non-negative at the sweep limit (peak not bracketed)
    argmax_n   size maximizing the cumulative modeled energy (baseline: the
               two-pixel region scores zero)
    sizes      the swept n values, 2..n_max
    totals     per-step increment totals aligned with sizes
    energies   cumulative sums of totals with energies[0] = 0 at n = 2
    """

    n0: int | None
    argmax_n: int
    sizes: np.ndarray
    totals: np.ndarray
    energies: np.ndarray


def proposition1_scan(m: IncrementModel, n_max: int) -> Prop1Scan:
    """Locate the finite peak of the modeled cumulative energy.

    Sweeps region size n from 2 to n_max with m's contrast, spread, and
    support radius (m.n is ignored by the sweep).  The cumulative energy is
    anchored at zero for n = 2, the smallest region the model covers, and the
    increment at size n is the modeled change of absorbing the n-th pixel.
    A finite peak exists iff the increments eventually go and stay negative;
    the peak can never lie beyond that point, which the scan asserts.
    """
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    sizes = np.arange(2, n_max + 1, dtype=np.int64)
    n = sizes.astype(np.float64)
    gain = 1.0 / (n * np.log(n))
    stat = -(m.delta_mu**2) / (2.0 * n * m.sigma_t_region**2)
    geo = -1.0 / (2.0 * math.pi * m.r_s**2)
    totals = gain + stat + geo

    # Energy relative to the n=2 baseline: absorbing pixel k (k >= 3) adds
    # totals[k - 2], so energies[i] = sum of totals[1..i].
    energies = np.concatenate(([0.0], np.cumsum(totals[1:])))
    argmax_n = int(sizes[int(np.argmax(energies))])

    neg = totals < 0.0
    if not bool(neg[-1]):
        n0 = None
    else:
        # Last index where the increment was still non-negative; persistent
        # negativity starts right after it (or at n=2 when never positive).
        nonneg = np.nonzero(~neg)[0]
        n0 = int(sizes[nonneg[-1] + 1]) if nonneg.size else 2
    if n0 is not None and argmax_n > n0:
        raise AssertionError(
            f"cumulative argmax {argmax_n} exceeds persistent-negative onset {n0}"
        )
    return Prop1Scan(n0=n0, argmax_n=argmax_n, sizes=sizes, totals=totals, energies=energies)


@dataclass(frozen=True)
class TargetRecord:
    """Per-target inputs and outcome for the empirical validation.

    scr/gamma/n are measured scene statistics, b_value the predicted
    threshold, rho the satisfaction ratio, iou the achieved mask quality.
    """

    scr: float
    gamma: float
    n: int
    b_value: float
    rho: float
    iou: float


@dataclass(frozen=True)
class BucketStat:
    lo: float
    hi: float
    count: int
    mean_iou: float  # NaN when the bucket is empty
    success_rate: float  # fraction with iou > 0.5; NaN when empty


@dataclass(frozen=True)
class BoundaryReport:
    records: tuple[TargetRecord, ...]
    buckets: tuple[BucketStat, ...]


def bucketed_validation(
    records: Sequence[TargetRecord],
    edges: Sequence[float] = DEFAULT_BUCKET_EDGES,
) -> BoundaryReport:
    """Group targets by satisfaction ratio and summarize mask quality.

    Bucket i covers (edges[i], edges[i+1]]; every record's rho must fall in
    (edges[0], edges[-1]] so the bucket counts sum to the total.  Empty
    buckets are reported with NaN statistics, never dropped.
    """
    edges = tuple(float(e) for e in edges)
    if len(edges) < 2:
        raise ValueError("need at least two bucket edges")
    if any(a >= b for a, b in zip(edges, edges[1:])):
        raise ValueError(f"bucket edges must be strictly increasing, got {edges}")

    members: list[list[TargetRecord]] = [[] for _ in range(len(edges) - 1)]
    for rec in records:
        rho = rec.rho
        if math.isnan(rho) or rho <= edges[0] or rho > edges[-1]:
            raise ValueError(f"rho {rho} outside bucket range ({edges[0]}, {edges[-1]}]")
        for i in range(len(edges) - 1):
            if edges[i] < rho <= edges[i + 1]:
                members[i].append(rec)
                break

    buckets = []
    for i, recs in enumerate(members):
        if recs:
            ious = np.array([r.iou for r in recs], dtype=np.float64)
            mean_iou = float(ious.mean())
            success = float(np.mean(ious > 0.5))
        else:
            mean_iou = math.nan
            success = math.nan
        buckets.append(
            BucketStat(
                lo=edges[i],
                hi=edges[i + 1],
                count=len(recs),
                mean_iou=mean_iou,
                success_rate=success,
            )
        )
    return BoundaryReport(records=tuple(records), buckets=tuple(buckets))


def _json_num(x: float) -> float | None:
    if isinstance(x, float) and (math.isnan(x) or math.isinf(x)):
        return None
    return x


def boundary_report_to_json(report: BoundaryReport) -> str:
    """Serialize a report to JSON; NaN and infinities become null."""
    payload = {
        "v": 1,
        "records": [
            {
                "scr": _json_num(r.scr),
                "gamma": _json_num(r.gamma),
                "n": r.n,
                "b_value": _json_num(r.b_value),
                "rho": _json_num(r.rho),
                "iou": _json_num(r.iou),
            }
            for r in report.records
        ],
        "buckets": [
            {
                "lo": _json_num(b.lo),
                "hi": _json_num(b.hi),
                "count": b.count,
                "mean_iou": _json_num(b.mean_iou),
                "success_rate": _json_num(b.success_rate),
            }
            for b in report.buckets
        ],
    }
    return json.dumps(payload, indent=2)


def boundary_report_to_csv(report: BoundaryReport) -> str:
    """Per-target records as CSV (one row per target)."""
    buf = io.StringIO()
    writer = csv.DictWriter(
        buf,
        fieldnames=["scr", "gamma", "n", "b_value", "rho", "iou"],
        lineterminator="\n",
    )
    writer.writeheader()
    for r in report.records:
        writer.writerow(
            {
                "scr": repr(r.scr),
                "gamma": repr(r.gamma),
                "n": r.n,
                "b_value": repr(r.b_value),
                "rho": "inf" if math.isinf(r.rho) else repr(r.rho),
                "iou": repr(r.iou),
            }
        )
    return buf.getvalue()
