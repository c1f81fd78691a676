// Local brush edits layered over a server-produced base mask.
//
// The composed pixel set is always exactly (base UNION adds) MINUS erases.
// Each stroke updates the edit sets by plain set algebra: adding a pixel
// inserts it into adds and drops it from erases, erasing does the reverse.
// The last operation on a pixel therefore wins, which makes the layer
// behave identically to painting directly on a bitmap.

import { BitMask, emptyMask } from "./rle.js";

export type BrushMode = "add" | "erase";

export class PendingMask {
  readonly width: number;
  readonly height: number;
  private base: Uint8Array;
  readonly adds: Set<number> = new Set();
  readonly erases: Set<number> = new Set();

  constructor(base: BitMask) {
    this.width = base.width;
    this.height = base.height;
    this.base = Uint8Array.from(base.data);
  }

  static blank(width: number, height: number): PendingMask {
    return new PendingMask(emptyMask(width, height));
  }

  /** Replace the base mask and drop all pending edits. */
  rebase(base: BitMask): void {
    if (base.width !== this.width || base.height !== this.height) {
      throw new Error(
        `base ${base.width}x${base.height} vs layer ${this.width}x${this.height}`);
    }
    this.base = Uint8Array.from(base.data);
    this.adds.clear();
    this.erases.clear();
  }

  get dirty(): boolean {
    return this.adds.size > 0 || this.erases.size > 0;
  }

  clearEdits(): void {
    this.adds.clear();
    this.erases.clear();
  }

  private index(x: number, y: number): number {
    return y * this.width + x;
  }

  setPixel(x: number, y: number, mode: BrushMode): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = this.index(x, y);
    if (mode === "add") {
      this.adds.add(i);
      this.erases.delete(i);
    } else {
      this.erases.add(i);
      this.adds.delete(i);
    }
  }

  /** Apply a circular brush of the given radius centered on (x, y). */
  paint(x: number, y: number, radius: number, mode: BrushMode): void {
    const r = Math.max(0, radius);
    const r2 = r * r;
    const cx = Math.round(x);
    const cy = Math.round(y);
    const lo = Math.ceil(-r);
    const hi = Math.floor(r);
    for (let dy = lo; dy <= hi; dy += 1) {
      for (let dx = lo; dx <= hi; dx += 1) {
        if (dx * dx + dy * dy <= r2) this.setPixel(cx + dx, cy + dy, mode);
      }
    }
  }

  composed(): BitMask {
    const data = Uint8Array.from(this.base);
    for (const i of this.adds) data[i] = 1;
    for (const i of this.erases) data[i] = 0;
    return { width: this.width, height: this.height, data };
  }

  baseMask(): BitMask {
    return { width: this.width, height: this.height, data: Uint8Array.from(this.base) };
  }
}
