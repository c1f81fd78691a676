// Session state machine behind the annotation view. Holds frame selection,
// grow parameters, the pending mask layer, and the navigation guard; all
// I/O goes through the injected client so the logic tests run headless.

import {
  AnnotationRecord,
  ApiError,
  GrowGate,
  GrowRequest,
  GrowResponse,
  ImageInfo,
  ServiceApi,
  Variant,
  View,
} from "./api.js";
import { PendingMask } from "./compose.js";
import { decodeRle, encodeRle } from "./rle.js";

export type Tool = "seed" | "brush-add" | "brush-erase";
export type ZoomPreset = 4 | 8 | 16;

export const ZOOM_PRESETS: readonly ZoomPreset[] = [4, 8, 16];
export const MIN_RS = 2;
export const DEFAULT_RS = 20;

export type GrowOutcome =
  | { kind: "grown"; response: GrowResponse }
  | { kind: "stale" }
  | { kind: "rejected"; error: ApiError }
  | { kind: "no-seed" };

export class Controller {
  images: ImageInfo[] = [];
  index = 0;

  view: View = "raw";
  overlayOpacity = 0.45;
  tool: Tool = "seed";
  zoom: ZoomPreset = 8;
  detailCenter: [number, number] | null = null;

  rS: number = DEFAULT_RS;
  connectivity: 4 | 8 = 8;
  variant: Variant = "full";
  brushRadius = 1;

  lastSeed: [number, number] | null = null;
  pending: PendingMask | null = null;
  lastGrow: GrowResponse | null = null;
  annotations: AnnotationRecord[] = [];

  private readonly gate = new GrowGate();
  private nextTarget = 0;

  constructor(
    private readonly client: ServiceApi,
    private readonly confirmDiscard: () => boolean = () => true,
  ) {}

  get current(): ImageInfo | null {
    return this.images[this.index] ?? null;
  }

  /** Unsaved brush edits on the current frame. */
  get dirty(): boolean {
    return this.pending?.dirty ?? false;
  }

  get growBusy(): boolean {
    return this.gate.busy;
  }

  async loadImages(): Promise<void> {
    this.images = await this.client.listImages();
    if (this.images.length > 0) await this.selectFrame(0, { force: true });
  }

  /**
   * Switch frames. Returns false when blocked by the unsaved-edit guard.
   * Clears the per-frame mask state and reloads the frame's annotations.
   */
  async selectFrame(i: number, opts: { force?: boolean } = {}): Promise<boolean> {
    if (this.images.length === 0) return false;
    const target = Math.min(Math.max(i, 0), this.images.length - 1);
    if (!opts.force && target === this.index) return true;
    if (this.dirty && !this.confirmDiscard()) return false;
    this.index = target;
    this.lastSeed = null;
    this.pending = null;
    this.lastGrow = null;
    this.detailCenter = null;
    const img = this.current;
    this.annotations = img ? await this.client.listAnnotations(img.id) : [];
    const forThis = this.annotations.map((r) => r.target_id);
    this.nextTarget = forThis.length > 0 ? Math.max(...forThis) + 1 : 0;
    return true;
  }

  async nextFrame(): Promise<boolean> {
    return this.selectFrame(this.index + 1);
  }

  async prevFrame(): Promise<boolean> {
    return this.selectFrame(this.index - 1);
  }

  /** Slider floor: supports below 2 px are rejected. */
  setRs(v: number): void {
    this.rS = Math.max(MIN_RS, v);
  }

  setZoom(z: ZoomPreset): void {
    this.zoom = z;
  }

  /** Keep the detail-view center inside the current frame. */
  setDetailCenter(x: number, y: number): void {
    const img = this.current;
    if (!img) return;
    this.detailCenter = [
      Math.min(Math.max(x, 0), img.width - 1),
      Math.min(Math.max(y, 0), img.height - 1),
    ];
  }

  /** Drop a seed: recenter the detail view on it and grow from scratch. */
  async seedClick(x: number, y: number): Promise<GrowOutcome> {
    const img = this.current;
    if (!img) return { kind: "no-seed" };
    this.lastSeed = [Math.round(x), Math.round(y)];
    this.setDetailCenter(x, y);
    return this.regrow();
  }

  /** Re-run /grow at the last seed with the current parameters. */
  async regrow(): Promise<GrowOutcome> {
    const img = this.current;
    const seed = this.lastSeed;
    if (!img || !seed) return { kind: "no-seed" };
    const req: GrowRequest = {
      image_id: img.id,
      seed,
      r_s: this.rS,
      connectivity: this.connectivity,
      variant: this.variant,
    };
    let resp: GrowResponse | null;
    try {
      resp = await this.gate.run((signal) => this.client.grow(req, signal));
    } catch (e) {
      if (e instanceof ApiError) return { kind: "rejected", error: e };
      throw e;
    }
    if (resp === null) return { kind: "stale" };
    this.lastGrow = resp;
    const base = decodeRle(resp.mask);
    if (this.pending && this.pending.width === base.width && this.pending.height === base.height) {
      this.pending.rebase(base);
    } else {
      this.pending = new PendingMask(base);
    }
    return { kind: "grown", response: resp };
  }

  /** Change the support radius and refresh the overlay if a seed is set. */
  async adjustRs(v: number): Promise<GrowOutcome> {
    this.setRs(v);
    if (!this.lastSeed) return { kind: "no-seed" };
    return this.regrow();
  }

  paintAt(x: number, y: number): void {
    if (!this.pending) return;
    if (this.tool === "brush-add") {
      this.pending.paint(x, y, this.brushRadius, "add");
    } else if (this.tool === "brush-erase") {
      this.pending.paint(x, y, this.brushRadius, "erase");
    }
  }

  /**
   * Persist the composed mask: refined when brush edits were applied,
   * verified when the grown mask is accepted untouched.
   */
  async accept(): Promise<AnnotationRecord | null> {
    const img = this.current;
    if (!img || !this.pending) return null;
    const composed = this.pending.composed();
    const status = this.pending.dirty ? "refined" : "verified";
    const rec = await this.client.postAnnotation({
      image_id: img.id,
      target_id: this.nextTarget,
      mask: encodeRle(composed),
      status,
      ...(this.lastSeed ? { seed: this.lastSeed } : {}),
      r_s: this.rS,
    });
    this.nextTarget += 1;
    this.annotations = this.annotations.filter(
      (r) => r.target_id !== rec.target_id).concat([rec]);
    this.pending.rebase(composed);
    return rec;
  }

  /** One-hand review keys: n/p frame nav, a accept, g re-grow. */
  async handleKey(key: string): Promise<string | null> {
    switch (key) {
      case "n":
        return (await this.nextFrame()) ? "next" : "blocked";
      case "p":
        return (await this.prevFrame()) ? "prev" : "blocked";
      case "a":
        return (await this.accept()) ? "accepted" : null;
      case "g": {
        const out = await this.regrow();
        return out.kind === "no-seed" ? null : out.kind;
      }
      default:
        return null;
    }
  }
}
