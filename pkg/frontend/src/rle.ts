// Run-length encoded binary masks, wire-compatible with the annotation service.
//
// Wire form: {"w":W,"h":H,"runs":[[start,len],...]} where runs index the
// row-major flattened grid, are sorted, non-overlapping, and in-bounds.

export interface BitMask {
  readonly width: number;
  readonly height: number;
  /** Row-major, one byte per pixel, 0 or 1. Length = width * height. */
  readonly data: Uint8Array;
}

export class RleFormatError extends Error {
  override name = "RleFormatError";
}

export function emptyMask(width: number, height: number): BitMask {
  if (!Number.isInteger(width) || !Number.isInteger(height) || width < 1 || height < 1) {
    throw new RleFormatError(`bad mask dimensions ${width}x${height}`);
  }
  return { width, height, data: new Uint8Array(width * height) };
}

function requireInt(value: unknown, what: string): number {
  if (typeof value !== "number" || !Number.isInteger(value)) {
    throw new RleFormatError(`${what} must be an integer, got ${JSON.stringify(value)}`);
  }
  return value;
}

/** Decode a wire RLE string or already-parsed object into a BitMask. */
export function decodeRle(rle: string | unknown): BitMask {
  let obj: unknown = rle;
  if (typeof rle === "string") {
    try {
      obj = JSON.parse(rle);
    } catch (e) {
      throw new RleFormatError(`invalid RLE JSON: ${String(e)}`);
    }
  }
  if (typeof obj !== "object" || obj === null) {
    throw new RleFormatError("RLE object missing w/h/runs");
  }
  const rec = obj as Record<string, unknown>;
  if (!("w" in rec) || !("h" in rec) || !("runs" in rec)) {
    throw new RleFormatError("RLE object missing w/h/runs");
  }
  const w = requireInt(rec["w"], "w");
  const h = requireInt(rec["h"], "h");
  if (w < 1 || h < 1) {
    throw new RleFormatError(`bad mask dimensions ${w}x${h}`);
  }
  const runs = rec["runs"];
  if (!Array.isArray(runs)) {
    throw new RleFormatError("runs must be a list of [start, len] pairs");
  }
  const data = new Uint8Array(w * h);
  let prevEnd = 0;
  for (const run of runs) {
    if (!Array.isArray(run) || run.length !== 2) {
      throw new RleFormatError(`malformed run ${JSON.stringify(run)}`);
    }
    const start = requireInt(run[0], "run start");
    const length = requireInt(run[1], "run length");
    if (length < 1) {
      throw new RleFormatError(`malformed run ${JSON.stringify(run)}`);
    }
    if (start < prevEnd) {
      throw new RleFormatError(`unsorted or overlapping run at start=${start}`);
    }
    if (start + length > w * h) {
      throw new RleFormatError(`run ${JSON.stringify(run)} exceeds ${w}x${h} grid`);
    }
    data.fill(1, start, start + length);
    prevEnd = start + length;
  }
  return { width: w, height: h, data };
}

/** Maximal row-major runs of set pixels over the flattened grid. */
export function runsOf(data: Uint8Array): Array<[number, number]> {
  const runs: Array<[number, number]> = [];
  let i = 0;
  const n = data.length;
  while (i < n) {
    if (data[i]) {
      const start = i;
      while (i < n && data[i]) i += 1;
      runs.push([start, i - start]);
    } else {
      i += 1;
    }
  }
  return runs;
}

/** Canonical wire string; byte-identical to the service's own encoder. */
export function encodeRle(m: BitMask): string {
  return JSON.stringify({ w: m.width, h: m.height, runs: runsOf(m.data) });
}

export function maskArea(m: BitMask): number {
  let area = 0;
  for (const v of m.data) area += v ? 1 : 0;
  return area;
}

export function masksEqual(a: BitMask, b: BitMask): boolean {
  if (a.width !== b.width || a.height !== b.height) return false;
  for (let i = 0; i < a.data.length; i += 1) {
    if ((a.data[i] ? 1 : 0) !== (b.data[i] ? 1 : 0)) return false;
  }
  return true;
}
