// Deterministic helpers for property-style tests.

import { BitMask } from "../src/rle.js";

/** Small seeded PRNG, uniform in [0, 1). */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Integer in [lo, hi] inclusive. */
export function randInt(rng: () => number, lo: number, hi: number): number {
  return lo + Math.floor(rng() * (hi - lo + 1));
}

export function randomMask(rng: () => number, width: number, height: number, p: number): BitMask {
  const data = new Uint8Array(width * height);
  for (let i = 0; i < data.length; i += 1) data[i] = rng() < p ? 1 : 0;
  return { width, height, data };
}
