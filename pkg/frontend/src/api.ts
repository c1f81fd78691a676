// Typed client for the annotation service. Field names follow the wire
// format verbatim so payloads round-trip without translation.

export type View = "raw" | "clahe" | "pseudocolor";
export type Variant =
  | "full"
  | "no_size_prior"
  | "no_saliency"
  | "no_homogeneity"
  | "no_geometric_prior";
export type AnnotationStatus = "auto" | "verified" | "refined";

export interface ImageInfo {
  id: string;
  width: number;
  height: number;
  sequence: number;
}

export interface GrowRequest {
  image_id: string;
  seed: [number, number];
  r_s?: number;
  k_radius?: [number, number];
  connectivity?: 4 | 8;
  variant?: Variant;
}

export interface GrowResponse {
  v: number;
  mask: string;
  k_star: number;
  energies: Array<number | null>;
  geometry: { area: number; centroid: [number, number]; equiv_radius: number };
  inverted: boolean;
}

export interface AnnotationRequest {
  image_id: string;
  target_id: number;
  mask: string;
  status: AnnotationStatus;
  seed?: [number, number];
  r_s?: number;
}

export interface AnnotationRecord {
  v: number;
  image_id: string;
  target_id: number;
  mask: string;
  seed: [number, number] | null;
  r_s: number | null;
  status: AnnotationStatus;
  edits: number;
  created_at: string;
  updated_at: string;
  seq: number;
}

export interface ExportResult {
  v: number;
  format: string;
  path: string;
  count: number;
}

export class ApiError extends Error {
  override name = "ApiError";

  constructor(
    readonly status: number,
    readonly kind: string,
    readonly detail: unknown,
  ) {
    super(`${kind} (${status}): ${typeof detail === "string" ? detail : JSON.stringify(detail)}`);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** The slice of the service the session controller talks to. */
export interface ServiceApi {
  listImages(): Promise<ImageInfo[]>;
  grow(req: GrowRequest, signal?: AbortSignal): Promise<GrowResponse>;
  postAnnotation(req: AnnotationRequest): Promise<AnnotationRecord>;
  listAnnotations(imageId?: string): Promise<AnnotationRecord[]>;
}

async function raiseForStatus(resp: Response): Promise<void> {
  if (resp.ok) return;
  let kind = "http-error";
  let detail: unknown = resp.statusText;
  try {
    const body: unknown = await resp.json();
    if (typeof body === "object" && body !== null) {
      const rec = body as Record<string, unknown>;
      if (typeof rec["error"] === "string") kind = rec["error"];
      else if ("detail" in rec) kind = "validation-error";
      if ("detail" in rec) detail = rec["detail"];
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(resp.status, kind, detail);
}

export class Client implements ServiceApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path);
    await raiseForStatus(resp);
    return (await resp.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown, signal?: AbortSignal): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
    await raiseForStatus(resp);
    return (await resp.json()) as T;
  }

  async listImages(): Promise<ImageInfo[]> {
    const out = await this.getJson<{ v: number; images: ImageInfo[] }>("/images");
    return out.images;
  }

  imageUrl(id: string, view: View = "raw", crop?: { x: number; y: number; w: number; h: number }): string {
    const params = new URLSearchParams({ view });
    if (crop) params.set("crop", `${crop.x},${crop.y},${crop.w},${crop.h}`);
    return `${this.baseUrl}/images/${encodeURIComponent(id)}?${params.toString()}`;
  }

  async grow(req: GrowRequest, signal?: AbortSignal): Promise<GrowResponse> {
    return this.postJson<GrowResponse>("/grow", { v: 1, ...req }, signal);
  }

  async postAnnotation(req: AnnotationRequest): Promise<AnnotationRecord> {
    return this.postJson<AnnotationRecord>("/annotations", { v: 1, ...req });
  }

  async listAnnotations(imageId?: string): Promise<AnnotationRecord[]> {
    const path = imageId
      ? `/annotations?image_id=${encodeURIComponent(imageId)}`
      : "/annotations";
    const out = await this.getJson<{ v: number; records: AnnotationRecord[] }>(path);
    return out.records;
  }

  async exportAnnotations(format: "png-dir" | "rle-jsonl", out?: string): Promise<ExportResult> {
    const body: Record<string, unknown> = { v: 1, format };
    if (out !== undefined) body["out"] = out;
    return this.postJson<ExportResult>("/export", body);
  }
}

/**
 * Keeps at most one grow request in flight: starting a new one aborts the
 * previous fetch, and any response that is not from the newest request is
 * discarded (resolved as null) by comparing sequence numbers.
 */
export class GrowGate {
  private seq = 0;
  private controller: AbortController | null = null;

  /** Sequence number of the newest request issued so far. */
  get latest(): number {
    return this.seq;
  }

  get busy(): boolean {
    return this.controller !== null;
  }

  async run<T>(task: (signal: AbortSignal) => Promise<T>): Promise<T | null> {
    const ticket = ++this.seq;
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    try {
      const out = await task(controller.signal);
      return ticket === this.seq ? out : null;
    } catch (e) {
      if (ticket !== this.seq) return null;
      throw e;
    } finally {
      if (ticket === this.seq) this.controller = null;
    }
  }
}
