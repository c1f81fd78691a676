"""Binary target masks: geometry, run-length codec, PNG interchange.

The wire format is row-major RLE over the flattened pixel grid,
{"w": int, "h": int, "runs": [[start, len], ...]} with start = y*w + x.
Encoding is canonical (maximal merged runs, sorted by start) so re-encoding
a decoded mask is byte-identical. Pixel centers sit at integer coordinates,
so centroids of multi-pixel masks are fractional.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

__all__ = [
    "Mask",
    "MaskGeometry",
    "EmptyMaskError",
    "MaskFormatError",
    "mask_geometry",
    "encode_rle",
    "decode_rle",
    "mask_to_png",
    "png_to_mask",
]


class EmptyMaskError(ValueError):
    """Operation requires a non-empty mask."""


class MaskFormatError(ValueError):
    """Malformed RLE runs or non-binary mask image."""


@dataclass(eq=False)
class Mask:
    """Binary pixel set over a width x height grid."""

    pixels: np.ndarray  # (h, w) bool

    def __post_init__(self):
        arr = np.ascontiguousarray(self.pixels, dtype=bool)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"mask must be a non-empty 2-D grid, got shape {arr.shape}")
        self.pixels = arr

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def area(self) -> int:
        return int(self.pixels.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mask):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    __hash__ = None

    @classmethod
    def empty(cls, width: int, height: int) -> "Mask":
        return cls(np.zeros((height, width), dtype=bool))

    @classmethod
    def from_coords(cls, width: int, height: int, coords) -> "Mask":
        """Build a mask from an iterable of (x, y) pixel coordinates."""
        arr = np.zeros((height, width), dtype=bool)
        for x, y in coords:
            if not (0 <= x < width and 0 <= y < height):
                raise ValueError(f"coordinate ({x}, {y}) outside {width}x{height} grid")
            arr[y, x] = True
        return cls(arr)


@dataclass(frozen=True)
class MaskGeometry:
    """Centroid, area, and equivalent radius sqrt(area/pi) of a mask."""

    centroid: tuple[float, float]  # (x, y), sub-pixel
    area: int
    equiv_radius: float


def mask_geometry(m: Mask) -> MaskGeometry:
    """Unweighted centroid over foreground pixel centers plus derived size."""
    ys, xs = np.nonzero(m.pixels)
    if xs.size == 0:
        raise EmptyMaskError("cannot compute geometry of an empty mask")
    area = int(xs.size)
    return MaskGeometry(
        centroid=(float(xs.mean()), float(ys.mean())),
        area=area,
        equiv_radius=math.sqrt(area / math.pi),
    )


def _runs_of(flat: np.ndarray) -> list[list[int]]:
    # transitions of the 0/1 sequence give run starts/ends; maximal by construction
    padded = np.diff(flat.astype(np.int8), prepend=0, append=0)
    starts = np.flatnonzero(padded == 1)
    ends = np.flatnonzero(padded == -1)
    return [[int(s), int(e - s)] for s, e in zip(starts, ends)]


def encode_rle(m: Mask) -> str:
    """Canonical JSON RLE string for the mask."""
    obj = {"w": m.width, "h": m.height, "runs": _runs_of(m.pixels.ravel())}
    return json.dumps(obj, separators=(",", ":"))


def rle_obj(m: Mask) -> dict:
    """RLE as a plain dict (for embedding in larger JSON payloads)."""
    return {"w": m.width, "h": m.height, "runs": _runs_of(m.pixels.ravel())}


def decode_rle(rle: str | bytes | dict) -> Mask:
    """Decode an RLE string or dict; rejects unsorted/overlapping/OOB runs."""
    if isinstance(rle, (str, bytes)):
        try:
            obj = json.loads(rle)
        except json.JSONDecodeError as e:
            raise MaskFormatError(f"invalid RLE JSON: {e}") from e
    else:
        obj = rle
    try:
        w, h, runs = int(obj["w"]), int(obj["h"]), obj["runs"]
    except (KeyError, TypeError, ValueError) as e:
        raise MaskFormatError(f"RLE object missing w/h/runs: {e}") from e
    if w < 1 or h < 1:
        raise MaskFormatError(f"bad mask dimensions {w}x{h}")
    flat = np.zeros(w * h, dtype=bool)
    prev_end = 0
    for run in runs:
        if not (isinstance(run, (list, tuple)) and len(run) == 2):
            raise MaskFormatError(f"malformed run {run!r}")
        start, length = run
        if not (isinstance(start, int) and isinstance(length, int)) or length < 1:
            raise MaskFormatError(f"malformed run {run!r}")
        if start < prev_end:
            raise MaskFormatError(f"unsorted or overlapping run at start={start}")
        if start + length > w * h:
            raise MaskFormatError(f"run {run!r} exceeds {w}x{h} grid")
        flat[start : start + length] = True
        prev_end = start + length
    return Mask(flat.reshape(h, w))


def mask_to_png(m: Mask, path: str | os.PathLike) -> None:
    """Write the mask as an 8-bit grayscale PNG, foreground 255."""
    img = Image.fromarray(np.where(m.pixels, 255, 0).astype(np.uint8))
    img.save(path, format="PNG")


def png_to_mask(path: str | os.PathLike) -> Mask:
    """Read a binary mask PNG; any value other than 0/255 is rejected."""
    with Image.open(path) as im:
        if im.mode != "L":
            raise MaskFormatError(f"mask PNG must be 8-bit grayscale, got mode {im.mode!r}")
        arr = np.asarray(im)
    bad = ~np.isin(arr, (0, 255))
    if bad.any():
        raise MaskFormatError(f"non-binary pixel values in {path} (e.g. {int(arr[bad][0])})")
    return Mask(arr == 255)
