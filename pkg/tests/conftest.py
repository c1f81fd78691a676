"""Shared helpers: random fixtures and the non-incremental growth oracle."""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from pointmask.growth import GrowthConfig, GrowthTrace
from pointmask.mask import Mask
from pointmask.raster import Raster, unify_polarity

NEG_INF = float("-inf")
_STRUCT3 = np.ones((3, 3), dtype=bool)


def random_mask(rng: np.random.Generator, width: int, height: int, p: float = 0.3) -> Mask:
    return Mask(rng.random((height, width)) < p)


def random_raster(rng: np.random.Generator, width: int, height: int,
                  levels: int | None = None) -> Raster:
    """Uniform random intensities; levels snaps to a k/levels dyadic grid."""
    data = rng.random((height, width))
    if levels:
        data = np.round(data * levels) / levels
    return Raster(data)


def oracle_energy(n: int, mu: float, sigma: float, d_max: float, mu_out: float,
                  cfg: GrowthConfig) -> float:
    """Independent scalar scoring of one region snapshot (sentinel = -inf)."""
    if n <= cfg.warmup or math.isnan(mu_out):
        return NEG_INF
    contrast = mu - mu_out
    if contrast <= 0.0:
        return NEG_INF
    size = math.log(math.log(n))
    geo = -(d_max**2) / (2.0 * cfg.support_radius**2)
    homog = math.log(contrast / (sigma + cfg.epsilon))
    return {
        "full": size + homog + geo,
        "no_size_prior": homog + geo,
        "no_saliency": size - math.log(sigma + cfg.epsilon) + geo,
        "no_homogeneity": size + math.log(contrast) + geo,
        "no_geometric_prior": size + homog,
    }[cfg.variant]


def verify_trace_oracle(img: Raster, seed: tuple[int, int], cfg: GrowthConfig,
                        trace: GrowthTrace, tol: float = 1e-9) -> None:
    """Assert every per-step trace quantity against from-scratch recomputation.

    For each path prefix the mean, population deviation, max seed distance,
    ring mean (scipy dilation), and energy are rebuilt without any
    incremental state and compared within tol. The backtrack index is
    compared against an exact linear scan.
    """
    unified, _ = unify_polarity(img, seed, cfg.polarity_window)
    data = unified.data
    h, w = data.shape
    x0, y0 = seed
    path = trace.path
    assert tuple(path[0]) == (x0, y0)
    assert len(trace.energies) == len(path) == len(trace.mu_in)

    region = np.zeros((h, w), dtype=bool)
    vals: list[float] = []
    for i, (x, y) in enumerate(path):
        assert not region[y, x], f"pixel ({x},{y}) absorbed twice"
        region[y, x] = True
        vals.append(float(data[y, x]))
        n = i + 1
        arr = np.asarray(vals)
        mu = float(arr.mean())
        sigma = float(arr.std())
        dmax = float(np.hypot(path[:n, 0] - x0, path[:n, 1] - y0).max())
        ring = ndimage.binary_dilation(region, structure=_STRUCT3,
                                       iterations=cfg.ring_width) & ~region
        rvals = data[ring]
        mu_out = float(rvals.mean()) if rvals.size else math.nan

        assert abs(trace.mu_in[i] - mu) <= tol, f"step {i}: mu_in"
        assert abs(trace.sigma_in[i] - sigma) <= tol, f"step {i}: sigma_in"
        assert abs(trace.d_max[i] - dmax) <= tol, f"step {i}: d_max"
        if math.isnan(mu_out):
            assert math.isnan(trace.mu_out[i]), f"step {i}: mu_out should be NaN"
        else:
            assert abs(trace.mu_out[i] - mu_out) <= tol, f"step {i}: mu_out"

        expect = oracle_energy(n, mu, sigma, dmax, mu_out, cfg)
        got = trace.energies[i]
        if expect == NEG_INF:
            assert got == NEG_INF, f"step {i}: expected sentinel, got {got}"
        else:
            assert abs(got - expect) <= tol, f"step {i}: energy {got} vs {expect}"

    best: float | None = None
    k: int | None = None
    for i, e in enumerate(trace.energies):
        if math.isfinite(e) and (best is None or e > best):
            best, k = float(e), i
    assert trace.k_star == k, f"k_star {trace.k_star} vs brute-force {k}"
