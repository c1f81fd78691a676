"""Synthetic infrared scenes with exact ground truth.

Targets are isotropic Gaussian spots composited over a background of white
noise, optionally low-pass structured clutter and soft bright ridges. The
ground-truth mask of a target is the pixel set where its own contribution
reaches tau times its peak amplitude, so detection scores can be computed
against a known answer. Every scene is a pure function of its spec and
seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import ndimage

from .mask import Mask, encode_rle, mask_to_png
from .raster import Raster

__all__ = [
    "TargetSpec",
    "EdgeSpec",
    "BackgroundSpec",
    "SceneSpec",
    "TargetTruth",
    "SceneTruth",
    "AnnulusTooSmallError",
    "render",
    "measure_scr_gamma",
    "SuiteConfig",
    "suite",
    "export_suite",
]


class AnnulusTooSmallError(ValueError):
    """Background annulus around a target has too few pixels to estimate."""


@dataclass(frozen=True)
class TargetSpec:
    """One Gaussian spot; negative amplitude renders a dark target."""

    center: tuple[float, float]  # sub-pixel (cx, cy)
    sigma_t: float  # PSF spread in pixels
    amplitude: float

    def __post_init__(self):
        if self.sigma_t <= 0:
            raise ValueError(f"sigma_t must be > 0, got {self.sigma_t}")


@dataclass(frozen=True)
class EdgeSpec:
    """Soft bright ridge along an infinite line through `point` at `angle`."""

    point: tuple[float, float]
    angle: float  # radians
    gain: float
    width: float = 1.5  # Gaussian profile sigma across the ridge

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError(f"width must be > 0, got {self.width}")


@dataclass(frozen=True)
class BackgroundSpec:
    base: float = 0.25
    noise_sigma: float = 0.04
    structure_gain: float = 0.0  # weight of the box-blurred clutter field
    structure_scale: int = 9  # box-blur side length
    edges: tuple[EdgeSpec, ...] = ()

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.structure_scale < 1:
            raise ValueError(f"structure_scale must be >= 1, got {self.structure_scale}")


@dataclass(frozen=True)
class SceneSpec:
    width: int
    height: int
    targets: tuple[TargetSpec, ...] = ()
    background: BackgroundSpec = field(default_factory=BackgroundSpec)
    rng_seed: int = 3407
    tau: float = 0.2  # GT threshold as a fraction of peak amplitude
    quantize_levels: int | None = None  # snap intensities to k/levels

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("scene dimensions must be >= 1")
        if not 0 < self.tau < 1:
            raise ValueError(f"tau must be in (0, 1), got {self.tau}")
        if self.quantize_levels is not None and self.quantize_levels < 2:
            raise ValueError("quantize_levels must be >= 2")


@dataclass(frozen=True)
class TargetTruth:
    """Measured per-target statistics (NaN when the GT mask is empty)."""

    scr: float
    gamma: float
    n: int


@dataclass
class SceneTruth:
    spec: SceneSpec
    raster: Raster
    gt_masks: list[Mask]
    truths: list[TargetTruth]


def _gauss_weight(w: int, h: int, t: TargetSpec) -> np.ndarray:
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    cx, cy = t.center
    r2 = (xx - cx) ** 2 + (yy - cy) ** 2
    return np.exp(-r2 / (2.0 * t.sigma_t**2))


def _gt_mask(w: int, h: int, t: TargetSpec, tau: float) -> Mask:
    if t.amplitude == 0.0:
        return Mask.empty(w, h)
    return Mask(_gauss_weight(w, h, t) >= tau)


def render(spec: SceneSpec) -> SceneTruth:
    """Compose background, ridges, and targets; derive GT masks and stats.

    Draw order is fixed (noise field, then structure field) so a given
    rng_seed always yields the same raster. Intensities are clamped to
    [0,1] after composition.
    """
    w, h = spec.width, spec.height
    for t in spec.targets:
        cx, cy = t.center
        m = 3.0 * t.sigma_t
        if not (cx - m >= 0 and cx + m <= w - 1 and cy - m >= 0 and cy + m <= h - 1):
            raise ValueError(f"target at {t.center} lacks a 3-sigma margin in {w}x{h}")

    rng = np.random.default_rng(spec.rng_seed)
    bg = spec.background
    img = np.full((h, w), bg.base, dtype=np.float64)
    if bg.noise_sigma > 0:
        img += bg.noise_sigma * rng.standard_normal((h, w))
    if bg.structure_gain != 0.0:
        clutter = rng.standard_normal((h, w))
        img += bg.structure_gain * ndimage.uniform_filter(
            clutter, size=bg.structure_scale, mode="nearest"
        )
    if bg.edges:
        yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
        for e in bg.edges:
            nx, ny = -math.sin(e.angle), math.cos(e.angle)  # unit normal
            d = (xx - e.point[0]) * nx + (yy - e.point[1]) * ny
            img += e.gain * np.exp(-(d**2) / (2.0 * e.width**2))

    gt_masks = [_gt_mask(w, h, t, spec.tau) for t in spec.targets]
    for i in range(len(gt_masks)):
        for j in range(i + 1, len(gt_masks)):
            if np.any(gt_masks[i].pixels & gt_masks[j].pixels):
                raise ValueError(f"GT masks of targets {i} and {j} overlap")

    for t in spec.targets:
        if t.amplitude != 0.0:
            img += t.amplitude * _gauss_weight(w, h, t)

    np.clip(img, 0.0, 1.0, out=img)
    if spec.quantize_levels:
        img = np.round(img * spec.quantize_levels) / spec.quantize_levels
        np.clip(img, 0.0, 1.0, out=img)
    raster = Raster(img, bit_depth_origin=16)

    scene = SceneTruth(spec=spec, raster=raster, gt_masks=gt_masks, truths=[])
    for i, m in enumerate(gt_masks):
        if m.area == 0:
            scene.truths.append(TargetTruth(math.nan, math.nan, 0))
        else:
            scr, gamma, n = measure_scr_gamma(scene, i)
            scene.truths.append(TargetTruth(scr, gamma, n))
    return scene


def _dilate(pixels: np.ndarray, steps: int) -> np.ndarray:
    return ndimage.binary_dilation(pixels, structure=np.ones((3, 3), bool), iterations=steps)


def measure_scr_gamma(
    scene: SceneTruth, target_index: int, mask_override: Mask | None = None
) -> tuple[float, float, int]:
    """Measured (scr, gamma, n) of one target from the rendered raster.

    scr = (mu_T - mu_B) / sigma_B with background statistics taken over an
    annulus (GT dilated by 5 minus GT dilated by 2). gamma = sigma_B /
    sigma_T with an inf sentinel for a perfectly uniform target.
    """
    gt = mask_override if mask_override is not None else scene.gt_masks[target_index]
    if gt.area == 0:
        raise ValueError("cannot measure an empty ground-truth mask")
    data = scene.raster.data
    annulus = _dilate(gt.pixels, 5) & ~_dilate(gt.pixels, 2)
    n_ann = int(np.count_nonzero(annulus))
    if n_ann < 20:
        raise AnnulusTooSmallError(f"annulus has {n_ann} pixels, need >= 20")
    tvals = data[gt.pixels]
    bvals = data[annulus]
    mu_t, sigma_t = float(tvals.mean()), float(tvals.std())
    mu_b, sigma_b = float(bvals.mean()), float(bvals.std())
    if sigma_b == 0.0:
        scr = math.inf if mu_t > mu_b else (-math.inf if mu_t < mu_b else 0.0)
    else:
        scr = (mu_t - mu_b) / sigma_b
    gamma = math.inf if sigma_t == 0.0 else sigma_b / sigma_t
    return scr, gamma, int(gt.area)


@dataclass(frozen=True)
class SuiteConfig:
    """Batch of single-target scenes with parameters drawn from ranges.

    scr sets the nominal target contrast: the amplitude is solved from
    A = scr * noise_sigma / mean-GT-weight so the rendered target hits the
    requested signal-to-clutter ratio against the white-noise floor.
    """

    count: int = 100
    width: int = 64
    height: int = 64
    rng_seed: int = 3407
    scr: tuple[float, float] = (5.0, 15.0)
    sigma_t: tuple[float, float] = (1.0, 2.5)
    base: tuple[float, float] = (0.2, 0.35)
    noise_sigma: float = 0.04
    structure_gain: float = 0.0
    structure_scale: int = 9
    n_edges: int = 0
    edge_gain: tuple[float, float] = (0.05, 0.15)
    dark_fraction: float = 0.0
    tau: float = 0.2
    quantize_levels: int | None = None
    center_jitter: float = 1.0

    def __post_init__(self):
        if self.count < 0:
            raise ValueError("count must be >= 0")
        if self.noise_sigma <= 0:
            raise ValueError("suite needs noise_sigma > 0 to place SCR")
        if not 0 <= self.dark_fraction <= 1:
            raise ValueError("dark_fraction must be in [0, 1]")


def _mean_gt_weight(w: int, h: int, t: TargetSpec, tau: float) -> float:
    wt = _gauss_weight(w, h, t)
    sel = wt >= tau
    return float(wt[sel].mean())


def scene_spec_for(cfg: SuiteConfig, rng: np.random.Generator) -> SceneSpec:
    """Draw one scene spec; consumes a fixed number of rng values."""
    w, h = cfg.width, cfg.height
    scr = float(rng.uniform(*cfg.scr))
    sig = float(rng.uniform(*cfg.sigma_t))
    base = float(rng.uniform(*cfg.base))
    jx, jy = rng.uniform(-cfg.center_jitter, cfg.center_jitter, size=2)
    center = (w / 2 + float(jx), h / 2 + float(jy))
    dark = bool(rng.uniform() < cfg.dark_fraction)
    edges = []
    for _ in range(cfg.n_edges):
        px = float(rng.uniform(0, w - 1))
        py = float(rng.uniform(0, h - 1))
        ang = float(rng.uniform(0, math.pi))
        gain = float(rng.uniform(*cfg.edge_gain))
        edges.append(EdgeSpec(point=(px, py), angle=ang, gain=gain))
    seed = int(rng.integers(0, 2**31 - 1))

    probe = TargetSpec(center=center, sigma_t=sig, amplitude=1.0)
    wbar = _mean_gt_weight(w, h, probe, cfg.tau)
    amp = scr * cfg.noise_sigma / wbar
    if dark:
        amp = -amp
        base = min(max(base, -amp + 0.05), 0.95)  # keep the dip above the clamp floor
    else:
        base = max(min(base, 0.95 - amp), 0.02)  # keep the peak under the clamp ceiling
    target = TargetSpec(center=center, sigma_t=sig, amplitude=amp)
    return SceneSpec(
        width=w,
        height=h,
        targets=(target,),
        background=BackgroundSpec(
            base=base,
            noise_sigma=cfg.noise_sigma,
            structure_gain=cfg.structure_gain,
            structure_scale=cfg.structure_scale,
            edges=tuple(edges),
        ),
        rng_seed=seed,
        tau=cfg.tau,
        quantize_levels=cfg.quantize_levels,
    )


def suite(cfg: SuiteConfig) -> list[SceneTruth]:
    """Render cfg.count single-target scenes, reproducible from rng_seed."""
    rng = np.random.default_rng(cfg.rng_seed)
    return [render(scene_spec_for(cfg, rng)) for _ in range(cfg.count)]


def export_suite(scenes: list[SceneTruth], outdir: str | Path) -> dict:
    """Write scenes to disk: 16-bit PNGs, GT mask PNGs + RLE, manifests.

    manifest.jsonl follows the batch-input convention (image path plus
    point and GT-mask entries per target); truth.jsonl records measured
    scr/gamma/pixel-count/centroid/radius per target.
    """
    from .mask import mask_geometry
    from PIL import Image

    out = Path(outdir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "gt").mkdir(parents=True, exist_ok=True)
    manifest_lines = []
    truth_lines = []
    for i, scene in enumerate(scenes):
        stem = f"scene_{i:04d}"
        img_path = out / "images" / f"{stem}.png"
        arr = np.round(scene.raster.data * 65535.0).astype(np.uint16)
        Image.fromarray(arr).save(img_path)
        targets = []
        for j, (m, t) in enumerate(zip(scene.gt_masks, scene.truths)):
            gt_png = out / "gt" / f"{stem}_t{j}.png"
            gt_rle = out / "gt" / f"{stem}_t{j}.json"
            mask_to_png(m, gt_png)
            gt_rle.write_text(encode_rle(m) + "\n")
            if m.area:
                g = mask_geometry(m)
                point = [int(round(g.centroid[0])), int(round(g.centroid[1]))]
                truth_lines.append(
                    {
                        "image": f"images/{stem}.png",
                        "target": j,
                        "scr": t.scr,
                        "gamma": None if math.isinf(t.gamma) else t.gamma,
                        "n": t.n,
                        "centroid": list(g.centroid),
                        "radius": g.equiv_radius,
                    }
                )
                targets.append({"point": point, "gt": f"gt/{stem}_t{j}.png"})
        # paths are outdir-relative so exported suites are relocatable
        manifest_lines.append({"image": f"images/{stem}.png", "targets": targets})
    with open(out / "manifest.jsonl", "w") as f:
        for line in manifest_lines:
            f.write(json.dumps(line) + "\n")
    with open(out / "truth.jsonl", "w") as f:
        for line in truth_lines:
            f.write(json.dumps(line) + "\n")
    return {"images": len(scenes), "manifest": str(out / "manifest.jsonl")}
