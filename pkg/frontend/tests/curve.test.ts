// Energy-curve layout math: exact coordinates, gap handling, peak marker.

import { describe, expect, it } from "vitest";

import { layoutCurve } from "../src/curve.js";

describe("layoutCurve", () => {
  it("maps indices and values linearly into the padded box", () => {
    const lay = layoutCurve([null, 0, 1, 2], 3, 100, 50, 10);
    expect(lay.segments.length).toBe(1);
    const seg = lay.segments[0]!;
    expect(seg.map((p) => p.n)).toEqual([2, 3, 4]);
    expect(seg[0]!.x).toBeCloseTo(10 + 80 / 3, 10);
    expect(seg[1]!.x).toBeCloseTo(10 + 160 / 3, 10);
    expect(seg[2]!.x).toBeCloseTo(90, 10);
    // higher energy sits higher on screen (smaller y)
    expect(seg[0]!.y).toBeCloseTo(40, 10);
    expect(seg[1]!.y).toBeCloseTo(25, 10);
    expect(seg[2]!.y).toBeCloseTo(10, 10);
    expect(lay.yMin).toBe(0);
    expect(lay.yMax).toBe(2);
  });

  it("places the peak marker at k*", () => {
    const lay = layoutCurve([null, 0, 1, 2], 3, 100, 50, 10);
    expect(lay.marker).not.toBeNull();
    expect(lay.marker!.n).toBe(4);
    expect(lay.marker!.value).toBe(2);
    expect(lay.marker!.x).toBeCloseTo(90, 10);
    expect(lay.marker!.y).toBeCloseTo(10, 10);
  });

  it("splits polyline segments at undefined energies", () => {
    const lay = layoutCurve([0, 1, null, 3, 2], 3, 100, 50, 10);
    expect(lay.segments.map((s) => s.length)).toEqual([2, 2]);
    expect(lay.segments[0]!.map((p) => p.n)).toEqual([1, 2]);
    expect(lay.segments[1]!.map((p) => p.n)).toEqual([4, 5]);
    // index spacing is preserved across the gap
    expect(lay.segments[1]![0]!.x).toBeCloseTo(10 + 3 * 20, 10);
  });

  it("treats non-finite numbers like gaps", () => {
    const lay = layoutCurve([0, Number.NaN, 2], null, 100, 50, 10);
    expect(lay.segments.map((s) => s.length)).toEqual([1, 1]);
  });

  it("returns an empty layout when nothing is finite", () => {
    const lay = layoutCurve([null, null, null], null, 100, 50, 10);
    expect(lay.segments).toEqual([]);
    expect(lay.marker).toBeNull();
    expect(Number.isNaN(lay.yMin)).toBe(true);
  });

  it("centers a flat curve vertically", () => {
    const lay = layoutCurve([5, 5, 5], 1, 100, 50, 10);
    for (const p of lay.segments[0]!) expect(p.y).toBeCloseTo(25, 10);
    expect(lay.marker!.y).toBeCloseTo(25, 10);
  });

  it("centers a single sample horizontally", () => {
    const lay = layoutCurve([1.5], 0, 100, 50, 10);
    expect(lay.segments[0]![0]!.x).toBeCloseTo(50, 10);
    expect(lay.marker!.x).toBeCloseTo(50, 10);
  });

  it("drops the marker when k* is missing or undefined", () => {
    expect(layoutCurve([0, 1], null, 100, 50, 10).marker).toBeNull();
    expect(layoutCurve([null, 1], 0, 100, 50, 10).marker).toBeNull();
    expect(layoutCurve([0, 1], 7, 100, 50, 10).marker).toBeNull();
  });

  it("rejects a box smaller than its padding", () => {
    expect(() => layoutCurve([0], 0, 16, 50, 8)).toThrow(/too small/);
    expect(() => layoutCurve([0], 0, 100, 16, 8)).toThrow(/too small/);
  });
});
