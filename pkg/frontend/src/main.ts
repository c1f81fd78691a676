// Browser wiring: canvases, controls, and keyboard routing around the
// session controller. All algorithmic state lives in the imported modules;
// this file only moves pixels and events.

import { ApiError, Client, View } from "./api.js";
import { Controller, GrowOutcome, Tool, ZOOM_PRESETS, ZoomPreset } from "./controller.js";
import { layoutCurve } from "./curve.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

const client = new Client("");
const controller = new Controller(client, () => window.confirm("Discard unsaved edits?"));

const globalCanvas = byId<HTMLCanvasElement>("global-view");
const detailCanvas = byId<HTMLCanvasElement>("detail-view");
const curveCanvas = byId<HTMLCanvasElement>("energy-curve");
const statusLine = byId<HTMLElement>("status");
const frameLabel = byId<HTMLElement>("frame-label");
const rsSlider = byId<HTMLInputElement>("rs-slider");
const rsValue = byId<HTMLElement>("rs-value");
const opacitySlider = byId<HTMLInputElement>("opacity-slider");
const brushSize = byId<HTMLInputElement>("brush-size");
const viewSelect = byId<HTMLSelectElement>("view-select");
const variantSelect = byId<HTMLSelectElement>("variant-select");
const connectivitySelect = byId<HTMLSelectElement>("connectivity-select");
const acceptButton = byId<HTMLButtonElement>("accept-button");
const regrowButton = byId<HTMLButtonElement>("regrow-button");
const exportPngButton = byId<HTMLButtonElement>("export-png");
const exportJsonlButton = byId<HTMLButtonElement>("export-jsonl");
const prevButton = byId<HTMLButtonElement>("prev-frame");
const nextButton = byId<HTMLButtonElement>("next-frame");

let frameImage: HTMLImageElement | null = null;

function setStatus(text: string): void {
  statusLine.textContent = text;
}

function describeOutcome(out: GrowOutcome): string {
  switch (out.kind) {
    case "grown": {
      const g = out.response;
      const inv = g.inverted ? ", dark target" : "";
      return `mask: ${g.geometry.area} px, k*=${g.k_star + 1}${inv}`;
    }
    case "stale":
      return "superseded by a newer request";
    case "rejected":
      return `rejected: ${out.error.kind}`;
    case "no-seed":
      return "click a target first";
  }
}

// ---------------------------------------------------------------------------
// rendering

function drawOverlay(ctx: CanvasRenderingContext2D): void {
  const layer = controller.pending;
  const img = controller.current;
  if (!layer || !img) return;
  const composed = layer.composed();
  const shade = ctx.createImageData(img.width, img.height);
  const alpha = Math.round(255 * controller.overlayOpacity);
  composed.data.forEach((v, i) => {
    if (!v) return;
    shade.data[4 * i] = 255;
    shade.data[4 * i + 1] = 64;
    shade.data[4 * i + 2] = 32;
    shade.data[4 * i + 3] = alpha;
  });
  const off = document.createElement("canvas");
  off.width = img.width;
  off.height = img.height;
  off.getContext("2d")!.putImageData(shade, 0, 0);
  ctx.drawImage(off, 0, 0);
}

function drawSeedMarker(ctx: CanvasRenderingContext2D): void {
  const seed = controller.lastSeed;
  if (!seed) return;
  ctx.strokeStyle = "#00e5ff";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(seed[0] - 3.5, seed[1] + 0.5);
  ctx.lineTo(seed[0] + 4.5, seed[1] + 0.5);
  ctx.moveTo(seed[0] + 0.5, seed[1] - 3.5);
  ctx.lineTo(seed[0] + 0.5, seed[1] + 4.5);
  ctx.stroke();
}

function redrawGlobal(): void {
  const img = controller.current;
  if (!img || !frameImage) return;
  globalCanvas.width = img.width;
  globalCanvas.height = img.height;
  const ctx = globalCanvas.getContext("2d")!;
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(frameImage, 0, 0);
  drawOverlay(ctx);
  drawSeedMarker(ctx);
}

function redrawDetail(): void {
  const img = controller.current;
  const ctx = detailCanvas.getContext("2d")!;
  ctx.fillStyle = "#111";
  ctx.fillRect(0, 0, detailCanvas.width, detailCanvas.height);
  if (!img || !frameImage) return;
  const center = controller.detailCenter ?? [img.width / 2, img.height / 2];
  const zoom = controller.zoom;
  const sw = detailCanvas.width / zoom;
  const sh = detailCanvas.height / zoom;
  const sx = Math.min(Math.max(center[0] - sw / 2, 0), Math.max(img.width - sw, 0));
  const sy = Math.min(Math.max(center[1] - sh / 2, 0), Math.max(img.height - sh, 0));
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(globalCanvas, sx, sy, sw, sh, 0, 0, detailCanvas.width, detailCanvas.height);
}

function redrawCurve(): void {
  const ctx = curveCanvas.getContext("2d")!;
  ctx.fillStyle = "#181818";
  ctx.fillRect(0, 0, curveCanvas.width, curveCanvas.height);
  const grow = controller.lastGrow;
  if (!grow) return;
  const lay = layoutCurve(grow.energies, grow.k_star, curveCanvas.width, curveCanvas.height, 12);
  ctx.strokeStyle = "#7ec8ff";
  ctx.lineWidth = 1.5;
  for (const seg of lay.segments) {
    if (seg.length === 0) continue;
    ctx.beginPath();
    ctx.moveTo(seg[0]!.x, seg[0]!.y);
    for (const p of seg.slice(1)) ctx.lineTo(p.x, p.y);
    ctx.stroke();
    if (seg.length === 1) {
      ctx.fillStyle = "#7ec8ff";
      ctx.beginPath();
      ctx.arc(seg[0]!.x, seg[0]!.y, 2, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
  if (lay.marker) {
    ctx.strokeStyle = "#ffd54f";
    ctx.beginPath();
    ctx.arc(lay.marker.x, lay.marker.y, 4, 0, 2 * Math.PI);
    ctx.stroke();
    ctx.fillStyle = "#ffd54f";
    ctx.font = "11px sans-serif";
    ctx.fillText(`k*=${lay.marker.n}`, Math.min(lay.marker.x + 6, curveCanvas.width - 40),
      Math.max(lay.marker.y - 6, 12));
  }
}

function redrawAll(): void {
  redrawGlobal();
  redrawDetail();
  redrawCurve();
  const img = controller.current;
  frameLabel.textContent = img
    ? `${img.id} (${controller.index + 1}/${controller.images.length})` +
      `${controller.dirty ? " *" : ""}`
    : "no frames";
  acceptButton.disabled = !controller.pending;
}

async function reloadFrameImage(): Promise<void> {
  const img = controller.current;
  if (!img) return;
  const url = client.imageUrl(img.id, controller.view);
  frameImage = await new Promise<HTMLImageElement>((resolve, reject) => {
    const el = new Image();
    el.onload = () => resolve(el);
    el.onerror = () => reject(new Error(`failed to load ${url}`));
    el.src = url;
  });
  redrawAll();
}

// ---------------------------------------------------------------------------
// pointer handling

function canvasPoint(canvas: HTMLCanvasElement, e: MouseEvent): [number, number] {
  const rect = canvas.getBoundingClientRect();
  return [
    ((e.clientX - rect.left) * canvas.width) / rect.width,
    ((e.clientY - rect.top) * canvas.height) / rect.height,
  ];
}

function detailToImage(x: number, y: number): [number, number] | null {
  const img = controller.current;
  if (!img) return null;
  const center = controller.detailCenter ?? [img.width / 2, img.height / 2];
  const zoom = controller.zoom;
  const sw = detailCanvas.width / zoom;
  const sh = detailCanvas.height / zoom;
  const sx = Math.min(Math.max(center[0] - sw / 2, 0), Math.max(img.width - sw, 0));
  const sy = Math.min(Math.max(center[1] - sh / 2, 0), Math.max(img.height - sh, 0));
  return [sx + x / zoom, sy + y / zoom];
}

async function handleImageClick(x: number, y: number): Promise<void> {
  const img = controller.current;
  if (!img) return;
  if (controller.tool === "seed") {
    setStatus("growing...");
    const out = await controller.seedClick(Math.floor(x), Math.floor(y));
    if (out.kind !== "stale") setStatus(describeOutcome(out));
    redrawAll();
  } else {
    controller.paintAt(Math.floor(x), Math.floor(y));
    redrawAll();
  }
}

function attachPainting(canvas: HTMLCanvasElement, toImage: (x: number, y: number) => [number, number] | null): void {
  let painting = false;
  canvas.addEventListener("pointerdown", (e) => {
    const [cx, cy] = canvasPoint(canvas, e);
    const pt = toImage(cx, cy);
    if (!pt) return;
    if (controller.tool === "seed") {
      void handleImageClick(pt[0], pt[1]);
      return;
    }
    painting = true;
    canvas.setPointerCapture(e.pointerId);
    controller.paintAt(Math.floor(pt[0]), Math.floor(pt[1]));
    redrawAll();
  });
  canvas.addEventListener("pointermove", (e) => {
    if (!painting) return;
    const [cx, cy] = canvasPoint(canvas, e);
    const pt = toImage(cx, cy);
    if (!pt) return;
    controller.paintAt(Math.floor(pt[0]), Math.floor(pt[1]));
    redrawAll();
  });
  const stop = () => {
    painting = false;
  };
  canvas.addEventListener("pointerup", stop);
  canvas.addEventListener("pointercancel", stop);
}

// ---------------------------------------------------------------------------
// controls

function bindControls(): void {
  rsSlider.min = "2";
  rsSlider.value = String(controller.rS);
  rsValue.textContent = rsSlider.value;
  rsSlider.addEventListener("input", () => {
    rsValue.textContent = rsSlider.value;
  });
  rsSlider.addEventListener("change", () => {
    void (async () => {
      const out = await controller.adjustRs(Number(rsSlider.value));
      if (out.kind !== "stale" && out.kind !== "no-seed") setStatus(describeOutcome(out));
      redrawAll();
    })();
  });

  opacitySlider.addEventListener("input", () => {
    controller.overlayOpacity = Number(opacitySlider.value);
    redrawAll();
  });
  brushSize.addEventListener("change", () => {
    controller.brushRadius = Math.max(0, Number(brushSize.value));
  });

  viewSelect.addEventListener("change", () => {
    controller.view = viewSelect.value as View;
    void reloadFrameImage();
  });
  variantSelect.addEventListener("change", () => {
    controller.variant = variantSelect.value as typeof controller.variant;
  });
  connectivitySelect.addEventListener("change", () => {
    controller.connectivity = Number(connectivitySelect.value) === 4 ? 4 : 8;
  });

  for (const z of ZOOM_PRESETS) {
    byId<HTMLButtonElement>(`zoom-${z}`).addEventListener("click", () => {
      controller.setZoom(z as ZoomPreset);
      redrawDetail();
    });
  }

  for (const [value, id] of [
    ["seed", "tool-seed"],
    ["brush-add", "tool-add"],
    ["brush-erase", "tool-erase"],
  ] as Array<[Tool, string]>) {
    byId<HTMLInputElement>(id).addEventListener("change", () => {
      controller.tool = value;
    });
  }

  acceptButton.addEventListener("click", () => {
    void acceptCurrent();
  });
  regrowButton.addEventListener("click", () => {
    void (async () => {
      const out = await controller.regrow();
      if (out.kind !== "stale") setStatus(describeOutcome(out));
      redrawAll();
    })();
  });
  prevButton.addEventListener("click", () => {
    void navigate(-1);
  });
  nextButton.addEventListener("click", () => {
    void navigate(1);
  });

  exportPngButton.addEventListener("click", () => {
    void runExport("png-dir");
  });
  exportJsonlButton.addEventListener("click", () => {
    void runExport("rle-jsonl");
  });
}

async function acceptCurrent(): Promise<void> {
  try {
    const rec = await controller.accept();
    setStatus(rec
      ? `saved ${rec.image_id}/${rec.target_id} as ${rec.status}`
      : "nothing to save");
  } catch (e) {
    setStatus(e instanceof ApiError ? `save failed: ${e.kind}` : `save failed: ${String(e)}`);
  }
  redrawAll();
}

async function navigate(step: number): Promise<void> {
  const moved = step > 0 ? await controller.nextFrame() : await controller.prevFrame();
  if (moved) {
    await reloadFrameImage();
    setStatus("");
  } else {
    setStatus("navigation blocked: unsaved edits");
  }
  redrawAll();
}

async function runExport(format: "png-dir" | "rle-jsonl"): Promise<void> {
  try {
    const res = await client.exportAnnotations(format);
    setStatus(`exported ${res.count} mask(s) to ${res.path}`);
  } catch (e) {
    setStatus(e instanceof ApiError ? `export failed: ${e.kind}` : `export failed: ${String(e)}`);
  }
}

function bindKeyboard(): void {
  window.addEventListener("keydown", (e) => {
    const target = e.target as HTMLElement | null;
    if (target && ["INPUT", "SELECT", "TEXTAREA"].includes(target.tagName)) return;
    if (!["n", "p", "a", "g"].includes(e.key)) return;
    e.preventDefault();
    void (async () => {
      if (e.key === "n" || e.key === "p") {
        await navigate(e.key === "n" ? 1 : -1);
      } else {
        const action = await controller.handleKey(e.key);
        if (action) setStatus(action === "accepted" ? "saved" : action);
        redrawAll();
      }
    })();
  });
}

async function start(): Promise<void> {
  bindControls();
  bindKeyboard();
  attachPainting(globalCanvas, (x, y) => [x, y]);
  attachPainting(detailCanvas, (x, y) => detailToImage(x, y));
  setStatus("loading catalog...");
  try {
    await controller.loadImages();
  } catch (e) {
    setStatus(`catalog load failed: ${String(e)}`);
    return;
  }
  if (!controller.current) {
    setStatus("no images in the dataset");
    return;
  }
  await reloadFrameImage();
  setStatus("click a target to grow a mask");
}

void start();
