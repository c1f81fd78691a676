"""HTTP annotation service: browse images, view enhancements, grow masks, store reviews.

The service fronts one dataset directory.  If the directory contains
manifest.jsonl (the batch-input convention) images are listed in manifest
order; otherwise every top-level PNG is listed in sorted-name order.  Image
ids are file stems.

Endpoints (all JSON payloads carry "v": 1):

    GET  /images                          image catalog
    GET  /images/{id}?view=&crop=         PNG bytes; view raw | clahe | pseudocolor
    POST /grow                            seed -> RLE mask + energy curve
    POST /annotations                     append a review record
    GET  /annotations?image_id=           latest record per (image, target)
    POST /export                          dump masks as PNG dir or record JSONL
    GET  /ui/...                          browser frontend, when started with --ui

Annotations persist in an append-only JSONL log next to the dataset
(annotations.jsonl); the in-memory latest-state index is rebuilt by replaying
the log at startup, so the log is the single source of truth.  Review status
moves auto -> verified or auto -> refined -> verified only.

The enhanced views use contrast-limited adaptive histogram equalization
(8x8 tiles, clip limit 2.0) and the inferno colormap on the min-max scaled
image.  Run standalone with: python3 -m pointmask.service --root DIR
"""

from __future__ import annotations

import io
import json
import math
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Literal

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from .growth import GrowthConfig, NoEnergyPeakError, generate_mask, guided_mask, trace_to_json
from .mask import MaskFormatError, decode_rle, encode_rle, mask_geometry, mask_to_png
from .raster import load_raster

ALLOWED_TRANSITIONS = {("auto", "verified"), ("auto", "refined"), ("refined", "verified")}
STATUSES = ("auto", "verified", "refined")


def _err(status: int, kind: str, detail: str) -> HTTPException:
    return HTTPException(status, {"v": 1, "error": kind, "detail": detail})


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


# ---------------------------------------------------------------------------
# dataset catalog

class ImageEntry(BaseModel):
    id: str
    width: int
    height: int
    sequence: int
    path: Path

    model_config = {"arbitrary_types_allowed": True}


def _catalog(root: Path) -> list[ImageEntry]:
    from PIL import Image

    manifest = root / "manifest.jsonl"
    if manifest.exists():
        paths = []
        for line in manifest.read_text().splitlines():
            line = line.strip()
            if line:
                paths.append(root / json.loads(line)["image"])
    else:
        paths = sorted(p for p in root.glob("*.png"))
    entries = []
    seen: set[str] = set()
    for i, p in enumerate(paths):
        if p.stem in seen:
            raise ValueError(f"duplicate image id {p.stem!r} in {root}")
        seen.add(p.stem)
        with Image.open(p) as im:
            w, h = im.size
        entries.append(ImageEntry(id=p.stem, width=w, height=h, sequence=i, path=p))
    return entries


# ---------------------------------------------------------------------------
# annotation store

class AnnotationStore:
    """Append-only JSONL log with a latest-record index per (image, target).

    Replaying the log from scratch rebuilds the index exactly: appends are
    validated before they hit the log, replay is plain last-wins.
    """

    def __init__(self, log_path: Path):
        self.log_path = log_path
        self._lock = threading.Lock()
        self._index: dict[tuple[str, int], dict] = {}
        self._seq = 0
        if log_path.exists():
            for line in log_path.read_text().splitlines():
                if line.strip():
                    rec = json.loads(line)
                    self._index[(rec["image_id"], rec["target_id"])] = rec
                    self._seq = max(self._seq, rec["seq"])

    def latest(self, image_id: str | None = None) -> list[dict]:
        recs = [r for r in self._index.values()
                if image_id is None or r["image_id"] == image_id]
        return sorted(recs, key=lambda r: (r["image_id"], r["target_id"]))

    def append(self, image_id: str, target_id: int, rle: str, status: str,
               seed: list[int] | None, r_s: float | None) -> dict:
        with self._lock:
            prev = self._index.get((image_id, target_id))
            if prev is not None and (prev["status"], status) not in ALLOWED_TRANSITIONS:
                raise _err(409, "bad-transition", f"{prev['status']} -> {status}")
            now = _now()
            rec = {
                "v": 1,
                "image_id": image_id,
                "target_id": target_id,
                "mask": rle,
                "seed": seed,
                "r_s": r_s,
                "status": status,
                "edits": prev["edits"] + 1 if prev else 0,
                "created_at": prev["created_at"] if prev else now,
                "updated_at": now,
                "seq": self._seq + 1,
            }
            with open(self.log_path, "a") as f:
                f.write(json.dumps(rec) + "\n")
            self._seq += 1
            self._index[(image_id, target_id)] = rec
            return rec


# ---------------------------------------------------------------------------
# request bodies

class GrowRequest(BaseModel):
    v: int = 1
    image_id: str
    seed: list[int]
    r_s: float | None = None
    k_radius: list[float] | None = None  # [scale, radius] for guided mode
    connectivity: int = 8
    variant: str = "full"


class AnnotationRequest(BaseModel):
    v: int = 1
    image_id: str
    target_id: int
    mask: str | dict
    status: Literal["auto", "verified", "refined"]
    seed: list[int] | None = None
    r_s: float | None = None


class ExportRequest(BaseModel):
    v: int = 1
    format: Literal["png-dir", "rle-jsonl"]
    out: str | None = None


# ---------------------------------------------------------------------------
# view rendering

def _to_uint8(path: Path) -> np.ndarray:
    img = load_raster(path)
    return np.round(img.data * 255.0).astype(np.uint8)


def _parse_crop(crop: str, width: int, height: int) -> tuple[int, int, int, int]:
    try:
        x, y, w, h = (int(p) for p in crop.split(","))
    except ValueError:
        raise _err(400, "bad-crop", f"{crop!r}: expected x,y,w,h integers") from None
    if w <= 0 or h <= 0:
        raise _err(400, "bad-crop", f"{crop!r}: width and height must be > 0")
    x0, y0 = max(0, x), max(0, y)
    x1, y1 = min(width, x + w), min(height, y + h)
    if x1 <= x0 or y1 <= y0:
        raise _err(400, "bad-crop", f"{crop!r}: empty after clipping to bounds")
    return x0, y0, x1, y1


def _png_bytes(arr: np.ndarray) -> bytes:
    from PIL import Image

    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# app factory

def create_app(root: str | Path, log_path: str | Path | None = None,
               ui_dir: str | Path | None = None) -> FastAPI:
    root = Path(root)
    if not root.is_dir():
        raise ValueError(f"dataset root {root} is not a directory")
    images = _catalog(root)
    by_id = {e.id: e for e in images}
    store = AnnotationStore(Path(log_path) if log_path else root / "annotations.jsonl")
    app = FastAPI(title="pointmask annotation service")
    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        if not Path(ui_dir).is_dir():
            raise ValueError(f"ui dir {ui_dir} is not a directory")
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    @app.exception_handler(HTTPException)
    async def _flat_error(request: Request, exc: HTTPException):
        body = exc.detail if isinstance(exc.detail, dict) else {
            "v": 1, "error": "http", "detail": str(exc.detail)}
        return JSONResponse(status_code=exc.status_code, content=body)

    def _image(image_id: str) -> ImageEntry:
        entry = by_id.get(image_id)
        if entry is None:
            raise _err(404, "unknown-image", image_id)
        return entry

    @app.get("/images")
    def list_images():
        return {"v": 1, "images": [
            {"id": e.id, "width": e.width, "height": e.height, "sequence": e.sequence}
            for e in images
        ]}

    @app.get("/images/{image_id}")
    def get_image(image_id: str, view: str = "raw", crop: str | None = None):
        import cv2

        entry = _image(image_id)
        if view not in ("raw", "clahe", "pseudocolor"):
            raise _err(400, "bad-view", view)
        box = _parse_crop(crop, entry.width, entry.height) if crop else None
        if view == "raw":
            if box is None:
                # untouched source bytes: the raw view is bit-faithful
                return Response(entry.path.read_bytes(), media_type="image/png")
            from PIL import Image

            with Image.open(entry.path) as im:
                buf = io.BytesIO()
                im.crop(box).save(buf, format="PNG")
            return Response(buf.getvalue(), media_type="image/png")
        u8 = _to_uint8(entry.path)
        if view == "clahe":
            out = cv2.createCLAHE(clipLimit=2.0, tileGridSize=(8, 8)).apply(u8)
        else:
            out = cv2.cvtColor(cv2.applyColorMap(u8, cv2.COLORMAP_INFERNO), cv2.COLOR_BGR2RGB)
        if box is not None:
            x0, y0, x1, y1 = box
            out = out[y0:y1, x0:x1]
        return Response(_png_bytes(out), media_type="image/png")

    @app.post("/grow")
    def grow(req: GrowRequest):
        entry = _image(req.image_id)
        if len(req.seed) != 2:
            raise _err(422, "bad-seed", "seed must be [x, y]")
        x, y = req.seed
        if not (0 <= x < entry.width and 0 <= y < entry.height):
            raise _err(422, "seed-out-of-bounds", f"({x}, {y}) outside {entry.width}x{entry.height}")
        if req.r_s is not None and req.k_radius is not None:
            raise _err(422, "ambiguous-support", "give r_s or k_radius, not both")
        img = load_raster(entry.path)
        try:
            if req.k_radius is not None:
                if len(req.k_radius) != 2:
                    raise ValueError("k_radius must be [scale, radius]")
                cfg = GrowthConfig(connectivity=req.connectivity, variant=req.variant)
                m, trace = guided_mask(img, (x, y), req.k_radius[1], req.k_radius[0], cfg)
            else:
                cfg = GrowthConfig(support_radius=req.r_s if req.r_s is not None else 20.0,
                                   connectivity=req.connectivity, variant=req.variant)
                m, trace = generate_mask(img, (x, y), cfg)
        except ValueError as e:
            raise _err(422, "bad-parameters", str(e)) from None
        except NoEnergyPeakError as e:
            raise _err(409, "no-energy-peak", str(e)) from None
        g = mask_geometry(m)
        return {
            "v": 1,
            "mask": encode_rle(m),
            "k_star": trace.k_star,
            "energies": [float(e) if math.isfinite(e) else None for e in trace.energies],
            "geometry": {"area": g.area, "centroid": list(g.centroid),
                         "equiv_radius": g.equiv_radius},
            "inverted": bool(trace.inverted),
        }

    @app.post("/annotations")
    def post_annotation(req: AnnotationRequest):
        entry = _image(req.image_id)
        try:
            m = decode_rle(req.mask)
        except MaskFormatError as e:
            raise _err(400, "bad-rle", str(e)) from None
        if (m.width, m.height) != (entry.width, entry.height):
            raise _err(400, "bad-rle",
                       f"mask {m.width}x{m.height} vs image {entry.width}x{entry.height}")
        rec = store.append(req.image_id, req.target_id, encode_rle(m),
                           req.status, req.seed, req.r_s)
        return rec

    @app.get("/annotations")
    def get_annotations(image_id: str | None = None):
        if image_id is not None:
            _image(image_id)
        return {"v": 1, "records": store.latest(image_id)}

    @app.post("/export")
    def export(req: ExportRequest):
        records = store.latest()
        if req.format == "png-dir":
            out = Path(req.out) if req.out else root / "export"
            out.mkdir(parents=True, exist_ok=True)
            names = []
            for rec in records:
                name = f"{rec['image_id']}_{rec['target_id']}.png"
                mask_to_png(decode_rle(rec["mask"]), out / name)
                names.append(name)
            (out / "manifest.json").write_text(
                json.dumps({"v": 1, "masks": names}, indent=2) + "\n")
            return {"v": 1, "format": req.format, "path": str(out), "count": len(names)}
        out = Path(req.out) if req.out else root / "export.jsonl"
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w") as f:
            for rec in records:
                f.write(json.dumps(rec) + "\n")
        return {"v": 1, "format": req.format, "path": str(out), "count": len(records)}

    return app


def main(argv: list[str] | None = None) -> int:
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(description="serve one dataset directory for annotation")
    parser.add_argument("--root", required=True, help="dataset directory (images + manifest.jsonl)")
    parser.add_argument("--log", default=None, help="annotation log path (default: root/annotations.jsonl)")
    parser.add_argument("--ui", default=None, help="static dir to mount at /ui (the built browser frontend)")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8008)
    args = parser.parse_args(argv)
    uvicorn.run(create_app(args.root, args.log, args.ui), host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
