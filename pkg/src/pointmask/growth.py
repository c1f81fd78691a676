"""Energy-guided greedy region growth with retrospective backtracking.

From a single seed pixel the region is expanded one pixel at a time, always
absorbing the brightest unvisited frontier neighbor. Every prefix S_n of
the growth path is scored with

    E(S_n) = ln(ln n) + ln((mu_in - mu_out) / (sigma_in + epsilon))
             - d_max^2 / (2 * support_radius^2)

where mu_in/sigma_in are the region's intensity mean and population
standard deviation, mu_out is the mean over a thin background ring around
the region, and d_max is the largest Euclidean distance from any region
pixel to the seed. Growth never stops on an energy test; the final mask is
chosen after the fact as the prefix with the maximal finite energy.

Early steps (n <= warmup) and steps with non-positive contrast record a
-inf sentinel instead of an energy value.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .mask import Mask
from .raster import Raster, unify_polarity

__all__ = [
    "VARIANTS",
    "GrowthConfig",
    "RegionStats",
    "EnergyTerms",
    "GrowthTrace",
    "NoEnergyPeakError",
    "energy",
    "grow",
    "backtrack_mask",
    "generate_mask",
    "guided_mask",
    "effective_budget",
    "trace_to_json",
]

NEG_INF = float("-inf")

VARIANTS = ("full", "no_size_prior", "no_saliency", "no_homogeneity", "no_geometric_prior")

_OFFSETS_8 = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))
_OFFSETS_4 = ((-1, 0), (0, -1), (0, 1), (1, 0))


class NoEnergyPeakError(RuntimeError):
    """Every step of the growth trace carries the -inf sentinel."""


@dataclass(frozen=True)
class GrowthConfig:
    """Tuning knobs of one growth run.

    support_radius is the tolerance scale of the distance penalty, not the
    physical target radius. growth_budget=None derives the cap as
    ceil(pi * support_radius^2), clamped to [warmup + 1, image area].
    """

    support_radius: float = 20.0
    connectivity: int = 8
    epsilon: float = 1e-6
    warmup: int = 5
    growth_budget: int | None = None
    variant: str = "full"
    ring_width: int = 3
    polarity_window: int = 21

    def __post_init__(self):
        if self.support_radius <= 0:
            raise ValueError(f"support_radius must be > 0, got {self.support_radius}")
        if self.connectivity not in (4, 8):
            raise ValueError(f"connectivity must be 4 or 8, got {self.connectivity}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.warmup < 1:
            raise ValueError(f"warmup must be >= 1, got {self.warmup}")
        if self.growth_budget is not None and self.growth_budget < self.warmup + 1:
            raise ValueError(
                f"growth_budget {self.growth_budget} < warmup + 1 = {self.warmup + 1}"
            )
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.ring_width < 1:
            raise ValueError(f"ring_width must be >= 1, got {self.ring_width}")


def effective_budget(cfg: GrowthConfig, image_area: int) -> int:
    """Resolved growth cap for a given image size."""
    if cfg.growth_budget is not None:
        b = cfg.growth_budget
    else:
        b = math.ceil(math.pi * cfg.support_radius**2)
    return min(max(b, cfg.warmup + 1), image_area)


@dataclass(frozen=True)
class RegionStats:
    """Running region statistics after n absorbed pixels."""

    n: int
    mu_in: float
    sigma_in: float  # population standard deviation; exactly 0 at n = 1
    d_max: float


@dataclass(frozen=True)
class EnergyTerms:
    size: float  # ln(ln n)
    saliency_contrast: float  # mu_in - mu_out
    data: float  # ln(contrast / (sigma_in + epsilon))
    geo: float  # -d_max^2 / (2 * support_radius^2)
    total: float  # variant-dependent sum


def _total_energy(
    n: int, sigma_in: float, d_max: float, contrast: float, cfg: GrowthConfig
) -> float:
    """Variant-selected total; caller guarantees n >= 2 and contrast > 0."""
    v = cfg.variant
    size = math.log(math.log(n))
    geo = -(d_max * d_max) / (2.0 * cfg.support_radius**2)
    if v == "full":
        return size + math.log(contrast / (sigma_in + cfg.epsilon)) + geo
    if v == "no_size_prior":
        return math.log(contrast / (sigma_in + cfg.epsilon)) + geo
    if v == "no_saliency":
        return size - math.log(sigma_in + cfg.epsilon) + geo
    if v == "no_homogeneity":
        return size + math.log(contrast) + geo
    # no_geometric_prior: drop the distance penalty, budget still applies
    return size + math.log(contrast / (sigma_in + cfg.epsilon))


def energy(stats: RegionStats, mu_out: float, cfg: GrowthConfig) -> EnergyTerms | None:
    """Score a region snapshot; None is the sentinel for mu_in <= mu_out.

    The sentinel applies to every variant: even variants that drop the
    contrast factor are only evaluated where the region is brighter than
    its ring.
    """
    if stats.n < 2:
        raise ValueError(f"energy requires n >= 2, got n={stats.n}")
    contrast = stats.mu_in - mu_out
    if contrast <= 0.0:
        return None
    return EnergyTerms(
        size=math.log(math.log(stats.n)),
        saliency_contrast=contrast,
        data=math.log(contrast / (stats.sigma_in + cfg.epsilon)),
        geo=-(stats.d_max**2) / (2.0 * cfg.support_radius**2),
        total=_total_energy(stats.n, stats.sigma_in, stats.d_max, contrast, cfg),
    )


@dataclass
class GrowthTrace:
    """Full record of one growth run.

    path[0] is the seed; entry i holds statistics of the region formed by
    the first i+1 path pixels. energies uses -inf sentinels (warm-up,
    non-positive contrast, or empty ring); mu_out is NaN where the ring was
    empty.
    """

    width: int
    height: int
    seed: tuple[int, int]
    inverted: bool
    path: np.ndarray  # (N, 2) int32, columns x, y
    energies: np.ndarray  # (N,) float64
    mu_in: np.ndarray
    sigma_in: np.ndarray
    d_max: np.ndarray
    mu_out: np.ndarray
    config: GrowthConfig = field(default_factory=GrowthConfig)

    def __len__(self) -> int:
        return len(self.path)

    @property
    def k_star(self) -> int | None:
        """Index of the maximal finite energy; earliest wins ties."""
        if not np.isfinite(self.energies).any():
            return None
        return int(np.argmax(self.energies))

    def stats_at(self, i: int) -> RegionStats:
        return RegionStats(
            n=i + 1,
            mu_in=float(self.mu_in[i]),
            sigma_in=float(self.sigma_in[i]),
            d_max=float(self.d_max[i]),
        )

    @property
    def stats_per_step(self) -> list[RegionStats]:
        return [self.stats_at(i) for i in range(len(self))]


def grow(img: Raster, seed: tuple[int, int], cfg: GrowthConfig | None = None) -> GrowthTrace:
    """Run greedy growth from seed and record the full trace.

    The seed is anchored directly into the region (n=1, sigma=0) and its
    neighbors prime the frontier queue. Each iteration pops the brightest
    queued pixel (ties resolved by insertion order), updates mean/deviation
    incrementally, recomputes the background-ring mean, and records the
    energy or a sentinel. Stops when the frontier empties or the budget is
    reached.
    """
    if cfg is None:
        cfg = GrowthConfig()
    x0, y0 = seed
    if not img.in_bounds(x0, y0):
        raise ValueError(f"seed {seed} outside {img.width}x{img.height} raster")

    unified, inverted = unify_polarity(img, seed, cfg.polarity_window)
    intens = unified.data
    h, w = intens.shape
    budget = effective_budget(cfg, h * w)
    offsets = _OFFSETS_8 if cfg.connectivity == 8 else _OFFSETS_4
    rw = cfg.ring_width

    visited = np.zeros((h, w), dtype=bool)  # queued or absorbed
    region = np.zeros((h, w), dtype=bool)
    cover = np.zeros((h, w), dtype=np.int32)  # region pixels within Chebyshev rw
    ring_sum = 0.0
    ring_cnt = 0

    heap: list[tuple[float, int, int, int]] = []
    push_order = 0

    px: list[int] = []
    py: list[int] = []
    e_mu: list[float] = []
    e_sigma: list[float] = []
    e_dmax: list[float] = []
    e_muout: list[float] = []
    e_energy: list[float] = []

    # Welford accumulators (population form)
    n = 0
    mean = 0.0
    m2 = 0.0
    d_max = 0.0

    def absorb(x: int, y: int) -> None:
        nonlocal ring_sum, ring_cnt
        if cover[y, x] > 0:  # pixel leaves the ring as it joins the region
            ring_sum -= intens[y, x]
            ring_cnt -= 1
        region[y, x] = True
        ys = slice(max(0, y - rw), min(h, y + rw + 1))
        xs = slice(max(0, x - rw), min(w, x + rw + 1))
        sub = cover[ys, xs]
        sub += 1
        newly = (sub == 1) & ~region[ys, xs]
        cnt = int(np.count_nonzero(newly))
        if cnt:
            ring_sum += float(intens[ys, xs][newly].sum())
            ring_cnt += cnt

    def record(x: int, y: int) -> None:
        px.append(x)
        py.append(y)
        sigma = math.sqrt(m2 / n) if m2 > 0.0 else 0.0
        e_mu.append(mean)
        e_sigma.append(sigma)
        e_dmax.append(d_max)
        if ring_cnt > 0:
            mu_out = ring_sum / ring_cnt
        else:
            mu_out = math.nan
        e_muout.append(mu_out)
        if n <= cfg.warmup or ring_cnt == 0:
            e_energy.append(NEG_INF)
            return
        contrast = mean - mu_out
        if contrast <= 0.0:
            e_energy.append(NEG_INF)
        else:
            e_energy.append(_total_energy(n, sigma, d_max, contrast, cfg))

    def push_neighbors(x: int, y: int) -> None:
        nonlocal push_order
        for dy, dx in offsets:
            ny, nx = y + dy, x + dx
            if 0 <= ny < h and 0 <= nx < w and not visited[ny, nx]:
                visited[ny, nx] = True
                heapq.heappush(heap, (-intens[ny, nx], push_order, ny, nx))
                push_order += 1

    # seed anchoring
    visited[y0, x0] = True
    n = 1
    mean = float(intens[y0, x0])
    absorb(x0, y0)
    record(x0, y0)
    push_neighbors(x0, y0)

    while heap and n < budget:
        _, _, y, x = heapq.heappop(heap)
        v = float(intens[y, x])
        n += 1
        delta = v - mean
        mean += delta / n
        m2 += delta * (v - mean)
        d = math.hypot(x - x0, y - y0)
        if d > d_max:
            d_max = d
        absorb(x, y)
        record(x, y)
        push_neighbors(x, y)

    path = np.column_stack([np.asarray(px, dtype=np.int32), np.asarray(py, dtype=np.int32)])
    return GrowthTrace(
        width=w,
        height=h,
        seed=(x0, y0),
        inverted=inverted,
        path=path,
        energies=np.asarray(e_energy, dtype=np.float64),
        mu_in=np.asarray(e_mu, dtype=np.float64),
        sigma_in=np.asarray(e_sigma, dtype=np.float64),
        d_max=np.asarray(e_dmax, dtype=np.float64),
        mu_out=np.asarray(e_muout, dtype=np.float64),
        config=cfg,
    )


def backtrack_mask(trace: GrowthTrace) -> Mask:
    """Mask of the path prefix with maximal finite energy (seed..k_star)."""
    k = trace.k_star
    if k is None:
        raise NoEnergyPeakError(
            "no finite energy along the growth path; cannot backtrack a mask"
        )
    return Mask.from_coords(trace.width, trace.height, trace.path[: k + 1])


def generate_mask(
    img: Raster, seed: tuple[int, int], cfg: GrowthConfig | None = None
) -> tuple[Mask, GrowthTrace]:
    """Grow from seed and backtrack to the optimal prefix mask."""
    trace = grow(img, seed, cfg)
    return backtrack_mask(trace), trace


def guided_mask(
    img: Raster,
    center: tuple[int, int],
    radius: float,
    scale: float = 5.0,
    cfg: GrowthConfig | None = None,
) -> tuple[Mask, GrowthTrace]:
    """Growth with support_radius = scale * radius from a known target scale.

    The admissible support should exceed the physical radius (scale > 1
    in practice); scale = 1 is accepted so under-growth at the lower limit
    can be measured. The growth budget is re-derived from the scaled
    support.
    """
    if radius <= 0:
        raise ValueError(f"radius must be > 0, got {radius}")
    if scale < 1:
        raise ValueError(f"scale must be >= 1, got {scale}")
    if cfg is None:
        cfg = GrowthConfig()
    guided = replace(cfg, support_radius=scale * radius, growth_budget=None)
    return generate_mask(img, center, guided)


def trace_to_json(trace: GrowthTrace) -> dict:
    """JSON-ready trace; -inf energies and NaN mu_out become null."""
    cfg = trace.config
    return {
        "v": 1,
        "seed": [int(trace.seed[0]), int(trace.seed[1])],
        "inverted": bool(trace.inverted),
        "width": trace.width,
        "height": trace.height,
        "path": [[int(x), int(y)] for x, y in trace.path],
        "energies": [float(e) if math.isfinite(e) else None for e in trace.energies],
        "mu_in": [float(v) for v in trace.mu_in],
        "sigma_in": [float(v) for v in trace.sigma_in],
        "d_max": [float(v) for v in trace.d_max],
        "mu_out": [float(v) if math.isfinite(v) else None for v in trace.mu_out],
        "k_star": trace.k_star,
        "config": {
            "support_radius": cfg.support_radius,
            "connectivity": cfg.connectivity,
            "epsilon": cfg.epsilon,
            "warmup": cfg.warmup,
            "growth_budget": cfg.growth_budget,
            "variant": cfg.variant,
            "ring_width": cfg.ring_width,
            "polarity_window": cfg.polarity_window,
        },
    }
