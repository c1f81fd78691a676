"""Raster model for single-channel infrared frames.

Images are held as float64 arrays normalized into [0, 1], whatever the
source bit depth. Dark targets are handled by polarity unification: if the
seed pixel sits below the local background median the whole frame is
complemented so that growth always chases bright peaks.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

__all__ = [
    "Raster",
    "RasterFormatError",
    "load_raster",
    "local_background_median",
    "unify_polarity",
]

# PIL modes accepted for 8- and 16-bit single-channel input
_MODE_DEPTH = {"L": 8, "I": 16, "I;16": 16, "I;16B": 16, "I;16L": 16}


class RasterFormatError(ValueError):
    """Unsupported file format, channel layout, or degenerate image."""


@dataclass(frozen=True, eq=False)
class Raster:
    """Immutable normalized intensity grid.

    data is a (height, width) float64 array with every value in [0, 1].
    bit_depth_origin records whether the source file was 8- or 16-bit.
    """

    data: np.ndarray
    bit_depth_origin: int = 8

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"raster must be a non-empty 2-D array, got shape {arr.shape}")
        if float(arr.min()) < 0.0 or float(arr.max()) > 1.0:
            raise ValueError("raster intensities must lie in [0, 1]")
        if self.bit_depth_origin not in (8, 16):
            raise ValueError(f"bit_depth_origin must be 8 or 16, got {self.bit_depth_origin}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def complement(self) -> "Raster":
        """Elementwise 1 - I, preserving the recorded source depth."""
        return Raster(1.0 - self.data, self.bit_depth_origin)


def _normalize(arr: np.ndarray, normalization) -> np.ndarray:
    if normalization == "minmax":
        lo, hi = float(arr.min()), float(arr.max())
    elif (
        isinstance(normalization, (tuple, list))
        and len(normalization) == 3
        and normalization[0] == "percentile"
    ):
        p_lo, p_hi = float(normalization[1]), float(normalization[2])
        if not (0.0 <= p_lo < p_hi <= 100.0):
            raise ValueError(f"bad percentile range ({p_lo}, {p_hi})")
        lo, hi = (float(v) for v in np.percentile(arr, [p_lo, p_hi]))
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    if hi <= lo:  # constant image (or degenerate percentile span)
        return np.zeros_like(arr)
    return np.clip((arr - lo) / (hi - lo), 0.0, 1.0)


def load_raster(path: str | os.PathLike, normalization="minmax") -> Raster:
    """Load an 8/16-bit grayscale PNG or PGM and normalize into [0, 1].

    normalization is "minmax" (full range to [0, 1]) or
    ("percentile", lo, hi) which clips at the given percentiles of the raw
    values before scaling. A constant image maps to all zeros.
    """
    with Image.open(path) as im:
        if im.format not in ("PNG", "PPM"):
            raise RasterFormatError(f"unsupported format {im.format!r} for {path}")
        depth = _MODE_DEPTH.get(im.mode)
        if depth is None:
            raise RasterFormatError(
                f"expected single-channel 8/16-bit input, got mode {im.mode!r} for {path}"
            )
        arr = np.asarray(im, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise RasterFormatError(f"zero-size or non-2D image {path}")
    return Raster(_normalize(arr, normalization), depth)


def local_background_median(img: Raster, p: tuple[int, int], window: int = 21) -> float:
    """Median over the window-sided square centered at p = (x, y).

    The window is clipped at image borders rather than padded, so no
    synthetic intensities enter the estimate. The center pixel is included.
    """
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 3, got {window}")
    x, y = p
    if not img.in_bounds(x, y):
        raise ValueError(f"point {p} outside {img.width}x{img.height} raster")
    r = window // 2
    patch = img.data[max(0, y - r) : y + r + 1, max(0, x - r) : x + r + 1]
    return float(np.median(patch))


def unify_polarity(
    img: Raster, seed: tuple[int, int], window: int = 21
) -> tuple[Raster, bool]:
    """Return (raster, inverted) with the seed guaranteed bright-on-dark.

    If the seed intensity is strictly below the local background median the
    complement 1 - I is returned with inverted=True; otherwise the input
    raster is passed through unchanged.
    """
    x, y = seed
    b_loc = local_background_median(img, seed, window)
    if float(img.data[y, x]) < b_loc:
        return img.complement(), True
    return img, False
