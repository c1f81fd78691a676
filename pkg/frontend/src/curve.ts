// Pure layout math for the growth-energy curve. Index i of the energy
// array is the step that brought the region to n = i + 1 pixels; entries
// are null where the energy is undefined (warmup, empty ring, or
// non-positive contrast), and the peak index k* marks the chosen mask.

export interface CurvePoint {
  x: number;
  y: number;
  /** Region size n = index + 1. */
  n: number;
  value: number;
}

export interface CurveLayout {
  width: number;
  height: number;
  /** Polyline segments; finite runs split at null gaps. */
  segments: CurvePoint[][];
  marker: CurvePoint | null;
  yMin: number;
  yMax: number;
}

export function layoutCurve(
  energies: Array<number | null>,
  kStar: number | null,
  width: number,
  height: number,
  pad = 8,
): CurveLayout {
  if (width <= 2 * pad || height <= 2 * pad) {
    throw new Error(`plot box ${width}x${height} too small for pad ${pad}`);
  }
  const finite = energies.filter((v): v is number => v !== null && Number.isFinite(v));
  const empty: CurveLayout = {
    width, height, segments: [], marker: null, yMin: NaN, yMax: NaN,
  };
  if (finite.length === 0) return empty;

  const yMin = Math.min(...finite);
  const yMax = Math.max(...finite);
  const n = energies.length;
  const xAt = (i: number): number =>
    n === 1 ? width / 2 : pad + (i * (width - 2 * pad)) / (n - 1);
  const yAt = (v: number): number =>
    yMax === yMin
      ? height / 2
      : height - pad - ((v - yMin) / (yMax - yMin)) * (height - 2 * pad);

  const segments: CurvePoint[][] = [];
  let current: CurvePoint[] = [];
  energies.forEach((v, i) => {
    if (v === null || !Number.isFinite(v)) {
      if (current.length > 0) segments.push(current);
      current = [];
      return;
    }
    current.push({ x: xAt(i), y: yAt(v), n: i + 1, value: v });
  });
  if (current.length > 0) segments.push(current);

  let marker: CurvePoint | null = null;
  if (kStar !== null && kStar >= 0 && kStar < n) {
    const v = energies[kStar] ?? null;
    if (v !== null && Number.isFinite(v)) {
      marker = { x: xAt(kStar), y: yAt(v), n: kStar + 1, value: v };
    }
  }
  return { width, height, segments, marker, yMin, yMax };
}
