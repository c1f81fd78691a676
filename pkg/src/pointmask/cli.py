"""Command-line front end: mask generation, evaluation, and experiment sweeps.

Subcommands:

    grow        one image + one seed -> mask PNG, RLE, trace JSON
    batch       manifest of point annotations -> mask directory + summary
    eval        prediction dir vs ground-truth dir -> metrics report
    sweep-seed  seed-placement robustness table (center / interior / contour)
    sweep-rs    mask quality across support radii or guided scale factors
    ablate      energy-term ablation table across scoring variants
    boundary    detectability-ratio buckets vs achieved mask quality
    make-suite  render a synthetic suite to images/, gt/, manifest, truth

Every command reads an optional flat key=value config file (--config); any
flag given on the command line overrides the file, which overrides built-in
defaults.  Commands that write into an output directory also write
effective_config.json recording the merged configuration.  Results are
written as JSON (the machine-readable source of truth) with CSV and SVG
companions where a table or curve is natural.

Exit codes: 0 success, 2 usage error, 3 data error (unreadable or
inconsistent inputs), 4 algorithm error (no finite energy peak).
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .boundary import (
    TargetRecord,
    boundary_b,
    boundary_report_to_csv,
    boundary_report_to_json,
    bucketed_validation,
    satisfaction_ratio,
)
from .growth import (
    VARIANTS,
    GrowthConfig,
    NoEnergyPeakError,
    generate_mask,
    guided_mask,
    trace_to_json,
)
from .mask import (
    Mask,
    MaskFormatError,
    encode_rle,
    mask_geometry,
    mask_to_png,
    png_to_mask,
)
from .metrics import evaluate_dataset, geometry_errors, iou, report_to_csv, report_to_json
from .raster import RasterFormatError, load_raster
from .synth import SceneTruth, SuiteConfig, export_suite, render, scene_spec_for, suite

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_ALGO = 4

SAMPLES_PER_TARGET = 3  # interior/contour seed samples averaged per target


class CliError(Exception):
    """Carries an exit code and a machine-readable error payload."""

    def __init__(self, exit_code: int, kind: str, detail: str):
        super().__init__(detail)
        self.exit_code = exit_code
        self.payload = {"v": 1, "error": kind, "detail": detail}


# ---------------------------------------------------------------------------
# Flat key=value configuration with typed schemas

GROWTH_SCHEMA: dict[str, tuple[str, object]] = {
    "rs": ("float", 20.0),
    "variant": ("str", "full"),
    "connectivity": ("int", 8),
    "warmup": ("int", 5),
    "epsilon": ("float", 1e-6),
    "budget": ("maybe_int", None),
    "ring_width": ("int", 3),
    "polarity_window": ("int", 21),
}

# Defaults reproduce the frozen robustness suite: low-contrast extended
# bright cores whose energy genuinely peaks near the true extent.
ROBUSTNESS_SUITE_SCHEMA: dict[str, tuple[str, object]] = {
    "count": ("int", 200),
    "width": ("int", 128),
    "height": ("int", 128),
    "rng_seed": ("int", 3407),
    "scr": ("range", (5.0, 6.0)),
    "sigma_t": ("range", (6.5, 7.5)),
    "base": ("range", (0.2, 0.35)),
    "noise_sigma": ("float", 0.04),
    "structure_gain": ("float", 0.0),
    "structure_scale": ("int", 9),
    "n_edges": ("int", 0),
    "edge_gain": ("range", (0.05, 0.15)),
    "dark_fraction": ("float", 0.0),
    "tau": ("float", 0.81),
    "quantize_levels": ("maybe_int", None),
    "center_jitter": ("float", 1.0),
}

_SCHEMA_HELP = {
    "rs": "support radius of the distance prior (pixels)",
    "variant": "energy variant: " + ", ".join(VARIANTS),
    "connectivity": "frontier connectivity, 4 or 8",
    "warmup": "steps scored with the warm-up sentinel",
    "epsilon": "variance regularizer in the contrast term",
    "budget": "absorption budget override (default: pi rs^2)",
    "ring_width": "background ring width (dilation steps)",
    "polarity_window": "window for the polarity decision median",
    "count": "number of scenes",
    "width": "scene width", "height": "scene height",
    "rng_seed": "suite generator seed",
    "scr": "signal-to-clutter range lo,hi (population sense)",
    "scr_ladder": "log-spaced contrast bands lo,hi,count[;lo,hi,count...]",
    "sigma_t": "target spread range lo,hi",
    "base": "background level range lo,hi",
    "noise_sigma": "white-noise sigma",
    "structure_gain": "low-frequency clutter gain",
    "structure_scale": "low-frequency clutter scale",
    "n_edges": "soft ridge edges per scene",
    "edge_gain": "edge gain range lo,hi",
    "dark_fraction": "fraction of polarity-inverted targets",
    "tau": "ground-truth threshold on own contribution",
    "quantize_levels": "round intensities to k/levels grid",
    "center_jitter": "target jitter around scene center",
}


def _coerce(key: str, kind: str, raw: object):
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "str":
            return text
        if kind == "maybe_int":
            return None if text.lower() in ("", "none") else int(text)
        if kind == "range":
            lo, hi = (float(p) for p in text.split(","))
            return (lo, hi)
        if kind == "grid":
            return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError as e:
        raise CliError(EXIT_USAGE, "bad-value", f"{key}={text!r}: {e}") from None
    raise AssertionError(f"unknown schema kind {kind}")


def _read_config_file(path: str) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise CliError(EXIT_DATA, "config-unreadable", str(e)) from None
    out: dict[str, str] = {}
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(EXIT_USAGE, "bad-config-line", f"{path}:{ln}: expected key=value")
        key, val = line.split("=", 1)
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def _merge_config(schema: dict[str, tuple[str, object]], args: argparse.Namespace) -> dict:
    """defaults < config file < explicit flags, all coerced through the schema."""
    cfg = {k: default for k, (_, default) in schema.items()}
    if getattr(args, "config", None):
        for key, raw in _read_config_file(args.config).items():
            if key not in schema:
                raise CliError(EXIT_USAGE, "unknown-config-key", key)
            cfg[key] = _coerce(key, schema[key][0], raw)
    for key, (kind, _) in schema.items():
        raw = getattr(args, key, None)
        if raw is not None:
            cfg[key] = _coerce(key, kind, raw)
    return cfg


def _add_schema_flags(parser: argparse.ArgumentParser, schema: dict) -> None:
    for key in schema:
        parser.add_argument(
            "--" + key.replace("_", "-"),
            dest=key,
            default=None,
            metavar="V",
            help=_SCHEMA_HELP.get(key, key),
        )


def _growth_config(cfg: dict) -> GrowthConfig:
    try:
        return GrowthConfig(
            support_radius=cfg["rs"],
            connectivity=cfg["connectivity"],
            epsilon=cfg["epsilon"],
            warmup=cfg["warmup"],
            growth_budget=cfg["budget"],
            variant=cfg["variant"],
            ring_width=cfg["ring_width"],
            polarity_window=cfg["polarity_window"],
        )
    except ValueError as e:
        raise CliError(EXIT_USAGE, "bad-growth-config", str(e)) from None


def _suite_config(cfg: dict) -> SuiteConfig:
    try:
        return SuiteConfig(
            count=cfg["count"],
            width=cfg["width"],
            height=cfg["height"],
            rng_seed=cfg["rng_seed"],
            scr=cfg["scr"],
            sigma_t=cfg["sigma_t"],
            base=cfg["base"],
            noise_sigma=cfg["noise_sigma"],
            structure_gain=cfg["structure_gain"],
            structure_scale=cfg["structure_scale"],
            n_edges=cfg["n_edges"],
            edge_gain=cfg["edge_gain"],
            dark_fraction=cfg["dark_fraction"],
            tau=cfg["tau"],
            quantize_levels=cfg["quantize_levels"],
            center_jitter=cfg["center_jitter"],
        )
    except ValueError as e:
        raise CliError(EXIT_USAGE, "bad-suite-config", str(e)) from None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and (math.isnan(obj) or math.isinf(obj)):
        return None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dump_effective(out: Path, command: str, cfg: dict, extra: dict | None = None) -> None:
    payload = {"command": command, **cfg}
    if extra:
        payload.update(extra)
    _write_json(out / "effective_config.json", payload)


# ---------------------------------------------------------------------------
# Minimal deterministic SVG line chart

def _svg_chart(path: Path, x_labels: Sequence[str], values: Sequence[float],
               title: str, ylabel: str) -> None:
    w, h = 480, 320
    ml, mr, mt, mb = 56, 16, 36, 44
    pw, ph = w - ml - mr, h - mt - mb
    finite = [v for v in values if v == v and not math.isinf(v)]
    lo = min(finite + [0.0]) if finite else 0.0
    hi = max(finite + [1e-9]) if finite else 1.0
    if hi == lo:
        hi = lo + 1.0
    pad = 0.06 * (hi - lo)
    lo, hi = lo - pad if lo else lo, hi + pad

    def sx(i: int) -> float:
        if len(x_labels) == 1:
            return ml + pw / 2
        return ml + pw * i / (len(x_labels) - 1)

    def sy(v: float) -> float:
        return mt + ph * (1 - (v - lo) / (hi - lo))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}" font-family="monospace" font-size="11">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<text x="{w / 2:.2f}" y="20" text-anchor="middle" font-size="13">{title}</text>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<text x="14" y="{mt + ph / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 14 {mt + ph / 2:.2f})">{ylabel}</text>',
        f'<text x="{ml - 6}" y="{sy(hi) + 4:.2f}" text-anchor="end">{hi:.4g}</text>',
        f'<text x="{ml - 6}" y="{sy(lo) + 4:.2f}" text-anchor="end">{lo:.4g}</text>',
    ]
    pts = []
    for i, v in enumerate(values):
        parts.append(
            f'<text x="{sx(i):.2f}" y="{mt + ph + 16}" text-anchor="middle">{x_labels[i]}</text>'
        )
        if v == v and not math.isinf(v):
            pts.append(f"{sx(i):.2f},{sy(v):.2f}")
            parts.append(f'<circle cx="{sx(i):.2f}" cy="{sy(v):.2f}" r="3" fill="steelblue"/>')
            parts.append(
                f'<text x="{sx(i):.2f}" y="{sy(v) - 8:.2f}" text-anchor="middle">{v:.4g}</text>'
            )
    if len(pts) > 1:
        parts.append(
            f'<polyline points="{" ".join(pts)}" fill="none" stroke="steelblue" stroke-width="1.5"/>'
        )
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# Seed-placement harness shared by sweep-seed / sweep-rs / ablate / boundary

def _seed_pools(gt: Mask) -> tuple[tuple[int, int], list[tuple[int, int]], list[tuple[int, int]]]:
    """Center seed plus contour and interior seed pools of one GT mask.

    The contour is every mask pixel with a 4-neighbor outside the mask or
    outside the frame, in row-major scan order; the interior is the rest
    (falling back to the contour for hairline masks).
    """
    g = mask_geometry(gt)
    center = (int(round(g.centroid[0])), int(round(g.centroid[1])))
    px = gt.pixels
    ys, xs = np.nonzero(px)
    contour: list[tuple[int, int]] = []
    member: set[tuple[int, int]] = set()
    for x, y in zip(xs, ys):
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            xx, yy = x + dx, y + dy
            if not (0 <= xx < gt.width and 0 <= yy < gt.height) or not px[yy, xx]:
                contour.append((int(x), int(y)))
                member.add((int(x), int(y)))
                break
    interior = [(int(x), int(y)) for x, y in zip(xs, ys) if (int(x), int(y)) not in member]
    return center, contour, interior or contour


def _run_seed_mode(
    scenes: list[SceneTruth],
    mode: str,
    growth_cfg: GrowthConfig,
    sample_seed: int = 7,
    guided_k: float | None = None,
) -> dict:
    """Grow every target of every scene from seeds of one placement mode.

    Per target: sample seeds (one for center mode, SAMPLES_PER_TARGET for the
    stochastic modes), grow, average IoU over samples (a failed growth scores
    zero); geometry stats average over produced masks only.  Then average
    over targets.  The sampling stream restarts from sample_seed per call so
    modes are independently reproducible.
    """
    rng = np.random.default_rng(sample_seed)
    ious: list[float] = []
    ars: list[float] = []
    ces: list[float] = []
    res: list[float] = []
    no_peak = 0
    for scene in scenes:
        for gt in scene.gt_masks:
            center, contour, interior = _seed_pools(gt)
            if mode == "center":
                seeds = [center]
            elif mode == "boundary":
                idx = rng.choice(len(contour), size=min(SAMPLES_PER_TARGET, len(contour)), replace=False)
                seeds = [contour[j] for j in idx]
            elif mode == "random_interior":
                idx = rng.choice(len(interior), size=min(SAMPLES_PER_TARGET, len(interior)), replace=False)
                seeds = [interior[j] for j in idx]
            else:
                raise AssertionError(f"unknown seed mode {mode}")
            vi: list[float] = []
            va: list[float] = []
            vc: list[float] = []
            vr: list[float] = []
            g = mask_geometry(gt)
            for seed in seeds:
                try:
                    if guided_k is not None:
                        m, _ = guided_mask(scene.raster, seed, g.equiv_radius, scale=guided_k)
                    else:
                        m, _ = generate_mask(scene.raster, seed, growth_cfg)
                except NoEnergyPeakError:
                    vi.append(0.0)
                    no_peak += 1
                    continue
                vi.append(iou(m, gt))
                ar, ce, rerr = geometry_errors(m, gt)
                va.append(ar)
                vc.append(ce)
                vr.append(rerr)
            ious.append(float(np.mean(vi)))
            if va:
                ars.append(float(np.mean(va)))
                ces.append(float(np.mean(vc)))
                res.append(float(np.mean(vr)))
    return {
        "miou": float(np.mean(ious)) if ious else math.nan,
        "area_ratio": float(np.mean(ars)) if ars else math.nan,
        "centroid_error": float(np.mean(ces)) if ces else math.nan,
        "radius_error": float(np.mean(res)) if res else math.nan,
        "n_targets": len(ious),
        "no_peak": no_peak,
    }


# ---------------------------------------------------------------------------
# grow

def cmd_grow(args) -> int:
    cfg = _merge_config(GROWTH_SCHEMA, args)
    growth_cfg = _growth_config(cfg)
    try:
        seed = tuple(int(p) for p in args.seed.split(","))
        if len(seed) != 2:
            raise ValueError("need exactly x,y")
    except ValueError as e:
        raise CliError(EXIT_USAGE, "bad-seed", f"--seed {args.seed!r}: {e}") from None
    try:
        img = load_raster(args.image)
    except (OSError, RasterFormatError) as e:
        raise CliError(EXIT_DATA, "image-unreadable", f"{args.image}: {e}") from None
    try:
        m, trace = generate_mask(img, seed, growth_cfg)
    except NoEnergyPeakError as e:
        raise CliError(EXIT_ALGO, "no-energy-peak", str(e)) from None
    except ValueError as e:
        raise CliError(EXIT_DATA, "bad-seed-position", str(e)) from None

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    base = out.with_suffix("")
    rle_path = Path(args.rle) if args.rle else base.with_name(base.name + ".rle.json")
    trace_path = Path(args.trace) if args.trace else base.with_name(base.name + ".trace.json")
    mask_to_png(m, out)
    rle_path.write_text(encode_rle(m) + "\n")
    _write_json(trace_path, trace_to_json(trace))

    g = mask_geometry(m)
    print(json.dumps(_jsonable({
        "v": 1,
        "image": str(args.image),
        "seed": list(seed),
        "inverted": trace.inverted,
        "k_star": trace.k_star,
        "path_len": len(trace),
        "mask": {"area": g.area, "centroid": list(g.centroid), "equiv_radius": g.equiv_radius},
        "out": str(out),
        "rle": str(rle_path),
        "trace": str(trace_path),
        "effective_config": cfg,
    })))
    return EXIT_OK


# ---------------------------------------------------------------------------
# batch

def _read_manifest(path: str) -> list[dict]:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise CliError(EXIT_DATA, "manifest-unreadable", str(e)) from None
    records = []
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise CliError(EXIT_DATA, "bad-manifest-line", f"{path}:{ln}: {e}") from None
        if not isinstance(rec, dict) or "image" not in rec or "targets" not in rec:
            raise CliError(EXIT_DATA, "bad-manifest-record",
                           f"{path}:{ln}: need image and targets fields")
        records.append(rec)
    return records


def _batch_worker(job: tuple[str, int, tuple[int, int], dict]) -> dict:
    image_path, target_idx, seed, cfg = job
    img = load_raster(image_path)
    result = {"image": image_path, "target": target_idx, "seed": list(seed)}
    try:
        m, trace = generate_mask(img, seed, _growth_config(cfg))
    except NoEnergyPeakError:
        result["error"] = "no-energy-peak"
        return result
    except ValueError as e:
        result["error"] = "bad-seed-position"
        result["detail"] = str(e)
        return result
    g = mask_geometry(m)
    result.update(
        rle=encode_rle(m),
        k_star=trace.k_star,
        inverted=trace.inverted,
        geometry={"area": g.area, "centroid": list(g.centroid), "equiv_radius": g.equiv_radius},
    )
    return result


def cmd_batch(args) -> int:
    cfg = _merge_config(GROWTH_SCHEMA, args)
    _growth_config(cfg)  # validate before fanning out
    records = _read_manifest(args.manifest)
    manifest_dir = Path(args.manifest).resolve().parent

    jobs: list[tuple[str, int, tuple[int, int], dict]] = []
    for rec in records:
        image_path = Path(rec["image"])
        if not image_path.is_absolute():
            image_path = manifest_dir / image_path
        if not image_path.exists():
            raise CliError(EXIT_DATA, "image-missing", str(image_path))
        for j, tgt in enumerate(rec["targets"]):
            if "point" in tgt:
                x, y = tgt["point"]
                jobs.append((str(image_path), j, (int(x), int(y)), cfg))

    if args.jobs > 1 and jobs:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_batch_worker, jobs))
    else:
        results = [_batch_worker(job) for job in jobs]

    out = _out_dir(args)
    masks_dir = out / "masks"
    masks_dir.mkdir(exist_ok=True)
    summary = []
    for res in results:  # job submission order is manifest order: canonical
        entry = dict(res)
        if "rle" in res:
            name = f"{Path(res['image']).stem}_t{res['target']}.png"
            from .mask import decode_rle

            mask_to_png(decode_rle(res["rle"]), masks_dir / name)
            entry["mask"] = f"masks/{name}"  # relative: summaries compare across runs
        summary.append(entry)
    _write_json(out / "summary.json", {"v": 1, "count": len(summary), "records": summary})
    _dump_effective(out, "batch", cfg, {"manifest": str(args.manifest)})
    print(json.dumps({"v": 1, "out": str(out), "records": len(summary)}))
    return EXIT_OK


# ---------------------------------------------------------------------------
# eval

_TARGET_FILE_RE = re.compile(r"^(?P<key>.+)_t(?P<idx>\d+)$")


def _collect_mask_files(dirpath: str) -> dict[str, list[Path]]:
    d = Path(dirpath)
    if not d.is_dir():
        raise CliError(EXIT_DATA, "not-a-directory", str(d))
    groups: dict[str, list[tuple[int, str, Path]]] = {}
    for f in sorted(d.glob("*.png")):
        m = _TARGET_FILE_RE.match(f.stem)
        key, idx = (m["key"], int(m["idx"])) if m else (f.stem, 0)
        groups.setdefault(key, []).append((idx, f.name, f))
    return {k: [p for _, _, p in sorted(v)] for k, v in groups.items()}


def cmd_eval(args) -> int:
    schema = {"match_radius": ("float", 3.0)}
    cfg = _merge_config(schema, args)
    pred_groups = _collect_mask_files(args.pred_dir)
    gt_groups = _collect_mask_files(args.gt_dir)
    keys = sorted(set(pred_groups) | set(gt_groups))
    preds: list[list[Mask]] = []
    gts: list[list[Mask]] = []
    sizes: list[tuple[int, int]] = []
    try:
        for key in keys:
            ps = [png_to_mask(p) for p in pred_groups.get(key, [])]
            gs = [png_to_mask(p) for p in gt_groups.get(key, [])]
            dims = {(m.width, m.height) for m in ps + gs}
            if len(dims) > 1:
                raise CliError(EXIT_DATA, "mask-size-mismatch", f"{key}: {sorted(dims)}")
            preds.append(ps)
            gts.append(gs)
            sizes.append(next(iter(dims)))
    except (OSError, MaskFormatError) as e:
        raise CliError(EXIT_DATA, "mask-unreadable", str(e)) from None

    report = evaluate_dataset(preds, gts, match_radius=cfg["match_radius"], image_sizes=sizes)
    out = _out_dir(args)
    (out / "report.json").write_text(json.dumps({
        "v": 1,
        "images": keys,
        "report": json.loads(report_to_json(report)),
    }, indent=2) + "\n")
    (out / "report.csv").write_text(report_to_csv(report))
    _dump_effective(out, "eval", cfg, {"pred_dir": str(args.pred_dir), "gt_dir": str(args.gt_dir)})
    print(json.dumps(_jsonable({
        "v": 1, "out": str(out),
        "miou": report.miou, "pd": report.pd, "fa": report.fa,
        "n_targets": report.n_targets, "n_matched": report.n_matched,
    })))
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep-seed

SEED_MODES = ("center", "random_interior", "boundary")


def cmd_sweep_seed(args) -> int:
    schema = {**ROBUSTNESS_SUITE_SCHEMA, "rs": GROWTH_SCHEMA["rs"], "sample_seed": ("int", 7)}
    cfg = _merge_config(schema, args)
    scenes = suite(_suite_config(cfg))
    growth_cfg = GrowthConfig(support_radius=cfg["rs"])
    table = {
        mode: _run_seed_mode(scenes, mode, growth_cfg, sample_seed=cfg["sample_seed"])
        for mode in SEED_MODES
    }
    out = _out_dir(args)
    _write_json(out / "seed_table.json", {"v": 1, "modes": table})
    lines = ["mode,miou,area_ratio,centroid_error,radius_error,n_targets,no_peak"]
    for mode in SEED_MODES:
        r = table[mode]
        lines.append(
            f"{mode},{r['miou']!r},{r['area_ratio']!r},{r['centroid_error']!r},"
            f"{r['radius_error']!r},{r['n_targets']},{r['no_peak']}"
        )
    (out / "seed_table.csv").write_text("\n".join(lines) + "\n")
    _svg_chart(out / "seed_table.svg", list(SEED_MODES),
               [table[m]["miou"] for m in SEED_MODES],
               "mask quality by seed placement", "mean IoU")
    _dump_effective(out, "sweep-seed", cfg)
    print(json.dumps(_jsonable({"v": 1, "out": str(out), "modes": {
        m: {"miou": table[m]["miou"], "area_ratio": table[m]["area_ratio"]} for m in SEED_MODES
    }})))
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep-rs

def cmd_sweep_rs(args) -> int:
    schema = {**ROBUSTNESS_SUITE_SCHEMA,
              "rs_grid": ("grid", (2.0, 16.0, 20.0, 24.0)),
              "k_grid": ("grid", (4.0, 5.0, 6.0, 7.0, 8.0))}
    cfg = _merge_config(schema, args)
    if args.mode not in ("rs", "k"):
        raise CliError(EXIT_USAGE, "bad-mode", f"--mode must be rs or k, got {args.mode!r}")
    grid = cfg["rs_grid"] if args.mode == "rs" else cfg["k_grid"]
    if not grid:
        raise CliError(EXIT_USAGE, "empty-grid", "sweep grid must be non-empty")
    scenes = suite(_suite_config(cfg))
    rows = []
    for value in grid:
        if args.mode == "rs":
            r = _run_seed_mode(scenes, "center", GrowthConfig(support_radius=value))
        else:
            r = _run_seed_mode(scenes, "center", GrowthConfig(), guided_k=value)
        rows.append({"value": value, **r})
    out = _out_dir(args)
    _write_json(out / "sweep.json", {"v": 1, "mode": args.mode, "rows": rows})
    lines = [f"{args.mode},miou,area_ratio,centroid_error,radius_error,n_targets,no_peak"]
    for r in rows:
        lines.append(
            f"{r['value']!r},{r['miou']!r},{r['area_ratio']!r},{r['centroid_error']!r},"
            f"{r['radius_error']!r},{r['n_targets']},{r['no_peak']}"
        )
    (out / "sweep.csv").write_text("\n".join(lines) + "\n")
    label = "support radius" if args.mode == "rs" else "guided scale factor"
    _svg_chart(out / "sweep.svg", [f"{r['value']:g}" for r in rows],
               [r["miou"] for r in rows], f"mask quality vs {label}", "mean IoU")
    _dump_effective(out, "sweep-rs", cfg, {"mode": args.mode})
    print(json.dumps(_jsonable({"v": 1, "out": str(out), "mode": args.mode,
                                "miou": {f"{r['value']:g}": r["miou"] for r in rows}})))
    return EXIT_OK


# ---------------------------------------------------------------------------
# ablate

# Clutter added so removing the distance prior visibly over-grows: bright
# soft ridges are the leak channel greedy growth follows once unpenalized.
ABLATION_SUITE_SCHEMA = dict(ROBUSTNESS_SUITE_SCHEMA)
ABLATION_SUITE_SCHEMA.update({
    "n_edges": ("int", 2),
    "edge_gain": ("range", (0.10, 0.20)),
    "structure_gain": ("float", 0.12),
})


def cmd_ablate(args) -> int:
    schema = {**ABLATION_SUITE_SCHEMA, "rs": GROWTH_SCHEMA["rs"]}
    cfg = _merge_config(schema, args)
    scenes = suite(_suite_config(cfg))
    table = {}
    for variant in VARIANTS:
        table[variant] = _run_seed_mode(
            scenes, "center", GrowthConfig(support_radius=cfg["rs"], variant=variant)
        )
    out = _out_dir(args)
    _write_json(out / "ablation.json", {"v": 1, "variants": table})
    lines = ["variant,miou,area_ratio,n_targets,no_peak"]
    for v in VARIANTS:
        r = table[v]
        lines.append(f"{v},{r['miou']!r},{r['area_ratio']!r},{r['n_targets']},{r['no_peak']}")
    (out / "ablation.csv").write_text("\n".join(lines) + "\n")
    _svg_chart(out / "ablation_miou.svg", list(VARIANTS),
               [table[v]["miou"] for v in VARIANTS], "mask quality by energy variant", "mean IoU")
    _svg_chart(out / "ablation_area_ratio.svg", list(VARIANTS),
               [table[v]["area_ratio"] for v in VARIANTS],
               "mask size by energy variant", "area ratio")
    _dump_effective(out, "ablate", cfg)
    print(json.dumps(_jsonable({"v": 1, "out": str(out), "variants": {
        v: {"miou": table[v]["miou"], "area_ratio": table[v]["area_ratio"]} for v in VARIANTS
    }})))
    return EXIT_OK


# ---------------------------------------------------------------------------
# boundary

# Per-scene contrast is pinned to a ladder of log-spaced bands rather than
# drawn from one range: a dense band far below the boundary, a thin band just
# under it, and a dense band far above.  Ratios near 1-2 are reached through
# natural estimator spread from the outer bands, so the chancy transition zone
# is sampled without parking whole bands on top of it.
BOUNDARY_SUITE_SCHEMA = dict(ROBUSTNESS_SUITE_SCHEMA)
for _k in ("count", "scr"):
    del BOUNDARY_SUITE_SCHEMA[_k]
BOUNDARY_SUITE_SCHEMA.update({
    "width": ("int", 64),
    "height": ("int", 64),
    "scr_ladder": ("str", "0.30,0.70,300;0.95,1.15,62;8.0,13.0,175"),
    "sigma_t": ("range", (1.5, 1.75)),
    "tau": ("float", 0.6),
})


def _parse_ladder(text: str) -> list[float]:
    """Expand "lo,hi,count[;lo,hi,count...]" into log-spaced contrast values."""
    values: list[float] = []
    for band in text.split(";"):
        try:
            lo_s, hi_s, count_s = band.split(",")
            lo, hi, count = float(lo_s), float(hi_s), int(count_s)
        except ValueError:
            raise CliError(EXIT_USAGE, "bad-ladder",
                           f"band {band!r}: expected lo,hi,count") from None
        if lo <= 0 or hi < lo or count < 1:
            raise CliError(EXIT_USAGE, "bad-ladder",
                           f"band {band!r}: need 0 < lo <= hi, count >= 1")
        values.extend(float(v) for v in np.exp(np.linspace(math.log(lo), math.log(hi), count)))
    return values


def _ladder_scenes(cfg: dict) -> list[SceneTruth]:
    """Render one single-target scene per ladder value, sharing one generator."""
    ladder = _parse_ladder(cfg["scr_ladder"])
    sc = _suite_config({**cfg, "count": len(ladder), "scr": (min(ladder), max(ladder))})
    rng = np.random.default_rng(sc.rng_seed)
    specs = [
        scene_spec_for(replace(sc, scr=(float(s), float(s))), rng)
        for s in ladder
    ]
    return [render(spec) for spec in specs]


def cmd_boundary(args) -> int:
    from .synth import measure_scr_gamma

    schema = {**BOUNDARY_SUITE_SCHEMA, "rs": GROWTH_SCHEMA["rs"]}
    cfg = _merge_config(schema, args)
    scenes = _ladder_scenes(cfg)
    growth_cfg = GrowthConfig(support_radius=cfg["rs"])
    records = []
    nonpositive = 0
    for scene in scenes:
        for j, gt in enumerate(scene.gt_masks):
            scr, gamma, n = measure_scr_gamma(scene, j)
            b = boundary_b(n, gamma, cfg["rs"])
            rho = satisfaction_ratio(scr, b)
            center, _, _ = _seed_pools(gt)
            try:
                m, _ = generate_mask(scene.raster, center, growth_cfg)
                v = iou(m, gt)
            except NoEnergyPeakError:
                v = 0.0
            if rho <= 0:
                # measured contrast came out non-positive, so the ratio falls
                # outside the (0, inf] partition; report the count instead of
                # forcing these into a bucket
                nonpositive += 1
                continue
            records.append(TargetRecord(scr=scr, gamma=gamma, n=n, b_value=b, rho=rho, iou=v))
    try:
        report = bucketed_validation(records)
    except ValueError as e:
        raise CliError(EXIT_DATA, "bad-ratio", str(e)) from None
    out = _out_dir(args)
    doc = json.loads(boundary_report_to_json(report))
    doc["excluded_nonpositive_scr"] = nonpositive
    (out / "boundary.json").write_text(json.dumps(doc, indent=2) + "\n")
    (out / "boundary.csv").write_text(boundary_report_to_csv(report))
    labels = [f"({b.lo:g},{'inf' if math.isinf(b.hi) else f'{b.hi:g}'}]" for b in report.buckets]
    _svg_chart(out / "boundary_success.svg", labels,
               [b.success_rate for b in report.buckets],
               "success rate by satisfaction-ratio bucket", "P(IoU > 0.5)")
    _svg_chart(out / "boundary_miou.svg", labels,
               [b.mean_iou for b in report.buckets],
               "mask quality by satisfaction-ratio bucket", "mean IoU")
    _dump_effective(out, "boundary", cfg)
    print(json.dumps(_jsonable({
        "v": 1, "out": str(out),
        "excluded_nonpositive_scr": nonpositive,
        "buckets": [
            {"lo": b.lo, "hi": b.hi, "count": b.count,
             "success_rate": b.success_rate, "mean_iou": b.mean_iou}
            for b in report.buckets
        ],
    })))
    return EXIT_OK


# ---------------------------------------------------------------------------
# make-suite

def cmd_make_suite(args) -> int:
    cfg = _merge_config(ROBUSTNESS_SUITE_SCHEMA, args)
    scenes = suite(_suite_config(cfg))
    out = _out_dir(args)
    info = export_suite(scenes, out)
    _dump_effective(out, "make-suite", cfg)
    print(json.dumps(_jsonable({"v": 1, "out": str(out), **info})))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser wiring

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pointmask",
        description="Point-annotation to pixel-mask conversion and its experiment harnesses.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func, help_text: str, schema: dict | None = None):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, metavar="FILE",
                       help="flat key=value config file; flags override it")
        if schema:
            _add_schema_flags(p, schema)
        p.set_defaults(func=func)
        return p

    p = add("grow", cmd_grow, "grow one mask from one seed", GROWTH_SCHEMA)
    p.add_argument("image", help="input image (PNG, any bit depth)")
    p.add_argument("--seed", required=True, metavar="X,Y", help="seed pixel")
    p.add_argument("--out", required=True, metavar="PNG", help="mask output path")
    p.add_argument("--rle", default=None, metavar="FILE", help="RLE output (default: <out>.rle.json)")
    p.add_argument("--trace", default=None, metavar="FILE",
                   help="trace output (default: <out>.trace.json)")

    p = add("batch", cmd_batch, "grow masks for every point in a manifest", GROWTH_SCHEMA)
    p.add_argument("manifest", help="JSONL manifest: {\"image\":..., \"targets\":[{\"point\":[x,y]}]}")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--jobs", type=int, default=1, metavar="N",
                   help="parallel workers; output is independent of N")

    p = add("eval", cmd_eval, "score a prediction directory against ground truth",
            {"match_radius": ("float", 3.0)})
    p.add_argument("pred_dir", help="predicted masks (<image>_t<j>.png)")
    p.add_argument("gt_dir", help="ground-truth masks, same naming")
    p.add_argument("--out", required=True, metavar="DIR")

    p = add("sweep-seed", cmd_sweep_seed, "seed-placement robustness table",
            {**ROBUSTNESS_SUITE_SCHEMA, "rs": GROWTH_SCHEMA["rs"], "sample_seed": ("int", 7)})
    p.add_argument("--out", required=True, metavar="DIR")

    p = add("sweep-rs", cmd_sweep_rs, "quality across support radii or guided scales",
            {**ROBUSTNESS_SUITE_SCHEMA,
             "rs_grid": ("grid", (2.0, 16.0, 20.0, 24.0)),
             "k_grid": ("grid", (4.0, 5.0, 6.0, 7.0, 8.0))})
    p.add_argument("--mode", default="rs", choices=("rs", "k"),
                   help="sweep fixed radii (rs) or guided scale factors (k)")
    p.add_argument("--out", required=True, metavar="DIR")

    p = add("ablate", cmd_ablate, "score every energy variant on a cluttered suite",
            {**ABLATION_SUITE_SCHEMA, "rs": GROWTH_SCHEMA["rs"]})
    p.add_argument("--out", required=True, metavar="DIR")

    p = add("boundary", cmd_boundary, "detectability-ratio buckets vs mask quality",
            {**BOUNDARY_SUITE_SCHEMA, "rs": GROWTH_SCHEMA["rs"]})
    p.add_argument("--out", required=True, metavar="DIR")

    p = add("make-suite", cmd_make_suite, "render a synthetic suite to disk",
            ROBUSTNESS_SUITE_SCHEMA)
    p.add_argument("--out", required=True, metavar="DIR")

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(json.dumps(e.payload), file=sys.stderr)
        return e.exit_code
    except NoEnergyPeakError as e:
        print(json.dumps({"v": 1, "error": "no-energy-peak", "detail": str(e)}), file=sys.stderr)
        return EXIT_ALGO
    except (OSError, RasterFormatError, MaskFormatError, json.JSONDecodeError) as e:
        print(json.dumps({"v": 1, "error": "data", "detail": str(e)}), file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
