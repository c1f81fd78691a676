// Pending-mask layer: brush edits over a base mask must behave exactly like
// painting on a plain bitmap, and the composed set must always equal
// (base UNION adds) MINUS erases built from the exposed edit sets.

import { describe, expect, it } from "vitest";

import { BrushMode, PendingMask } from "../src/compose.js";
import { BitMask, masksEqual } from "../src/rle.js";
import { mulberry32, randInt, randomMask } from "./helpers.js";

/** Reference model: paint straight onto a bitmap, last write wins. */
function naivePaint(
  bitmap: Uint8Array, width: number, height: number,
  x: number, y: number, radius: number, mode: BrushMode,
): void {
  const r2 = radius * radius;
  const cx = Math.round(x);
  const cy = Math.round(y);
  for (let dy = -Math.ceil(radius); dy <= Math.ceil(radius); dy += 1) {
    for (let dx = -Math.ceil(radius); dx <= Math.ceil(radius); dx += 1) {
      if (dx * dx + dy * dy > r2) continue;
      const px = cx + dx;
      const py = cy + dy;
      if (px < 0 || py < 0 || px >= width || py >= height) continue;
      bitmap[py * width + px] = mode === "add" ? 1 : 0;
    }
  }
}

/** Independent composition from the exposed sets: (base | adds) & ~erases. */
function composeFromSets(layer: PendingMask, base: BitMask): BitMask {
  const data = Uint8Array.from(base.data);
  for (const i of layer.adds) data[i] = 1;
  for (const i of layer.erases) data[i] = 0;
  return { width: base.width, height: base.height, data };
}

describe("stroke property", () => {
  it("matches direct bitmap painting over 200 random stroke sequences", () => {
    const rng = mulberry32(20260823);
    for (let seq = 0; seq < 200; seq += 1) {
      const w = randInt(rng, 1, 40);
      const h = randInt(rng, 1, 40);
      const base = randomMask(rng, w, h, rng());
      const layer = new PendingMask(base);
      const model = Uint8Array.from(base.data);
      const strokes = randInt(rng, 0, 30);
      for (let s = 0; s < strokes; s += 1) {
        const mode: BrushMode = rng() < 0.5 ? "add" : "erase";
        // wander slightly outside the frame to exercise clipping
        const x = randInt(rng, -2, w + 1);
        const y = randInt(rng, -2, h + 1);
        const radius = randInt(rng, 0, 3);
        layer.paint(x, y, radius, mode);
        naivePaint(model, w, h, x, y, radius, mode);
      }
      const composed = layer.composed();
      expect(masksEqual(composed, { width: w, height: h, data: model })).toBe(true);
      // the documented formula, rebuilt from the exposed sets
      expect(masksEqual(composed, composeFromSets(layer, base))).toBe(true);
      // edit sets never overlap
      for (const i of layer.adds) expect(layer.erases.has(i)).toBe(false);
    }
  });

  it("add-then-erase of an off pixel leaves the mask unchanged", () => {
    const rng = mulberry32(5);
    for (let trial = 0; trial < 50; trial += 1) {
      const base = randomMask(rng, 12, 9, 0.4);
      const layer = new PendingMask(base);
      const before = layer.composed();
      let x = randInt(rng, 0, 11);
      let y = randInt(rng, 0, 8);
      while (before.data[y * 12 + x]) {
        x = randInt(rng, 0, 11);
        y = randInt(rng, 0, 8);
      }
      layer.paint(x, y, 0, "add");
      expect(layer.composed().data[y * 12 + x]).toBe(1);
      layer.paint(x, y, 0, "erase");
      expect(masksEqual(layer.composed(), before)).toBe(true);
    }
  });

  it("erase-then-add of a set pixel leaves the mask unchanged", () => {
    const base = randomMask(mulberry32(6), 10, 10, 1.0);
    const layer = new PendingMask(base);
    const before = layer.composed();
    layer.paint(4, 7, 0, "erase");
    expect(layer.composed().data[7 * 10 + 4]).toBe(0);
    layer.paint(4, 7, 0, "add");
    expect(masksEqual(layer.composed(), before)).toBe(true);
  });
});

describe("brush geometry", () => {
  function litPixels(layer: PendingMask): Array<[number, number]> {
    const out: Array<[number, number]> = [];
    const m = layer.composed();
    m.data.forEach((v, i) => {
      if (v) out.push([i % m.width, Math.floor(i / m.width)]);
    });
    return out;
  }

  it("radius 0 paints a single pixel", () => {
    const layer = PendingMask.blank(7, 7);
    layer.paint(3, 2, 0, "add");
    expect(litPixels(layer)).toEqual([[3, 2]]);
  });

  it("radius 1 paints a plus shape", () => {
    const layer = PendingMask.blank(7, 7);
    layer.paint(3, 3, 1, "add");
    expect(litPixels(layer).sort()).toEqual(
      [[3, 2], [2, 3], [3, 3], [4, 3], [3, 4]].sort());
  });

  it("radius 2 paints a 13 pixel disc", () => {
    const layer = PendingMask.blank(9, 9);
    layer.paint(4, 4, 2, "add");
    expect(litPixels(layer).length).toBe(13);
  });

  it("clips at the frame border", () => {
    const layer = PendingMask.blank(5, 5);
    layer.paint(0, 0, 1, "add");
    expect(litPixels(layer).sort()).toEqual([[0, 0], [1, 0], [0, 1]].sort());
  });

  it("fractional centers round to the nearest pixel", () => {
    const layer = PendingMask.blank(5, 5);
    layer.paint(2.4, 1.6, 0, "add");
    expect(litPixels(layer)).toEqual([[2, 2]]);
  });
});

describe("layer state", () => {
  it("tracks dirty across paint, clear, and rebase", () => {
    const layer = PendingMask.blank(6, 6);
    expect(layer.dirty).toBe(false);
    layer.paint(2, 2, 0, "add");
    expect(layer.dirty).toBe(true);
    layer.clearEdits();
    expect(layer.dirty).toBe(false);
    layer.paint(1, 1, 0, "add");
    layer.rebase(layer.composed());
    expect(layer.dirty).toBe(false);
    expect(layer.composed().data[1 * 6 + 1]).toBe(1);
  });

  it("erasing a base pixel then clearing edits restores the base", () => {
    const base = randomMask(mulberry32(9), 8, 8, 0.6);
    const layer = new PendingMask(base);
    layer.paint(3, 3, 2, "erase");
    layer.paint(6, 1, 1, "add");
    layer.clearEdits();
    expect(masksEqual(layer.composed(), base)).toBe(true);
  });

  it("rejects a rebase with different dimensions", () => {
    const layer = PendingMask.blank(6, 6);
    expect(() => layer.rebase(PendingMask.blank(5, 6).baseMask())).toThrow(/6x6/);
  });

  it("composed() returns an independent copy", () => {
    const layer = PendingMask.blank(4, 4);
    const a = layer.composed();
    a.data[0] = 1;
    expect(layer.composed().data[0]).toBe(0);
  });
});
