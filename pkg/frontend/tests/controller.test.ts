// Session controller: frame navigation with the unsaved-edit guard, grow
// parameter plumbing, stale-response handling, and the accept flow.

import { describe, expect, it } from "vitest";

import {
  AnnotationRecord,
  AnnotationRequest,
  ApiError,
  GrowRequest,
  GrowResponse,
  ImageInfo,
  ServiceApi,
} from "../src/api.js";
import { Controller, DEFAULT_RS, MIN_RS, ZOOM_PRESETS } from "../src/controller.js";
import { decodeRle, maskArea } from "../src/rle.js";

const BASE_RLE = '{"w":8,"h":6,"runs":[[9,3]]}';

function growResp(mask: string): GrowResponse {
  return {
    v: 1,
    mask,
    k_star: 2,
    energies: [null, 0.5, 1.2],
    geometry: { area: 3, centroid: [2, 1.2], equiv_radius: 0.98 },
    inverted: false,
  };
}

interface Harness {
  api: ServiceApi;
  growCalls: GrowRequest[];
  annotationCalls: AnnotationRequest[];
  posted: AnnotationRecord[];
}

function harness(opts: {
  images?: ImageInfo[];
  annotations?: Record<string, AnnotationRecord[]>;
  grow?: (req: GrowRequest, signal?: AbortSignal) => Promise<GrowResponse>;
} = {}): Harness {
  const images = opts.images ?? [
    { id: "t0", width: 8, height: 6, sequence: 0 },
    { id: "t1", width: 8, height: 6, sequence: 1 },
    { id: "t2", width: 8, height: 6, sequence: 2 },
  ];
  const growCalls: GrowRequest[] = [];
  const annotationCalls: AnnotationRequest[] = [];
  const posted: AnnotationRecord[] = [];
  let seq = 0;
  const api: ServiceApi = {
    listImages: async () => images,
    listAnnotations: async (imageId) => opts.annotations?.[imageId ?? ""] ?? [],
    grow: async (req, signal) => {
      growCalls.push(req);
      if (opts.grow) return opts.grow(req, signal);
      return growResp(BASE_RLE);
    },
    postAnnotation: async (req) => {
      annotationCalls.push(req);
      seq += 1;
      const rec: AnnotationRecord = {
        v: 1,
        image_id: req.image_id,
        target_id: req.target_id,
        mask: req.mask,
        seed: req.seed ?? null,
        r_s: req.r_s ?? null,
        status: req.status,
        edits: 0,
        created_at: "2026-01-01T00:00:00+00:00",
        updated_at: "2026-01-01T00:00:00+00:00",
        seq,
      };
      posted.push(rec);
      return rec;
    },
  };
  return { api, growCalls, annotationCalls, posted };
}

function deferred<T>() {
  let resolve!: (v: T) => void;
  let reject!: (e: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

describe("frame loading and navigation", () => {
  it("loads the catalog and selects the first frame", async () => {
    const h = harness();
    const c = new Controller(h.api);
    await c.loadImages();
    expect(c.images.length).toBe(3);
    expect(c.index).toBe(0);
    expect(c.current?.id).toBe("t0");
    expect(c.dirty).toBe(false);
  });

  it("clamps navigation at both ends", async () => {
    const h = harness();
    const c = new Controller(h.api);
    await c.loadImages();
    expect(await c.prevFrame()).toBe(true);
    expect(c.index).toBe(0);
    await c.nextFrame();
    await c.nextFrame();
    expect(c.index).toBe(2);
    expect(await c.nextFrame()).toBe(true);
    expect(c.index).toBe(2);
  });

  it("blocks navigation on unsaved edits until confirmed", async () => {
    const h = harness();
    let allow = false;
    let prompts = 0;
    const c = new Controller(h.api, () => {
      prompts += 1;
      return allow;
    });
    await c.loadImages();
    await c.seedClick(2, 1);
    c.tool = "brush-add";
    c.paintAt(5, 5);
    expect(c.dirty).toBe(true);

    expect(await c.nextFrame()).toBe(false);
    expect(prompts).toBe(1);
    expect(c.index).toBe(0);
    expect(c.pending).not.toBeNull();

    allow = true;
    expect(await c.nextFrame()).toBe(true);
    expect(prompts).toBe(2);
    expect(c.index).toBe(1);
    expect(c.pending).toBeNull();
    expect(c.lastSeed).toBeNull();
    expect(c.dirty).toBe(false);
  });

  it("does not prompt when no edits are pending", async () => {
    const h = harness();
    let prompts = 0;
    const c = new Controller(h.api, () => {
      prompts += 1;
      return false;
    });
    await c.loadImages();
    await c.seedClick(2, 1);
    expect(await c.nextFrame()).toBe(true);
    expect(prompts).toBe(0);
  });
});

describe("grow plumbing", () => {
  it("seed click rounds the seed, recenters the detail view, and grows", async () => {
    const h = harness();
    const c = new Controller(h.api);
    await c.loadImages();
    const out = await c.seedClick(3.6, 1.2);
    expect(out.kind).toBe("grown");
    expect(c.lastSeed).toEqual([4, 1]);
    expect(c.detailCenter).toEqual([3.6, 1.2]);
    expect(h.growCalls[0]).toEqual({
      image_id: "t0", seed: [4, 1], r_s: DEFAULT_RS, connectivity: 8, variant: "full",
    });
    expect(c.lastGrow?.k_star).toBe(2);
    expect(maskArea(c.pending!.composed())).toBe(maskArea(decodeRle(BASE_RLE)));
  });

  it("passes variant and connectivity through", async () => {
    const h = harness();
    const c = new Controller(h.api);
    await c.loadImages();
    c.variant = "no_homogeneity";
    c.connectivity = 4;
    await c.seedClick(0, 0);
    expect(h.growCalls[0]?.variant).toBe("no_homogeneity");
    expect(h.growCalls[0]?.connectivity).toBe(4);
  });

  it("clamps the support slider to the floor", async () => {
    const c = new Controller(harness().api);
    c.setRs(0.5);
    expect(c.rS).toBe(MIN_RS);
    c.setRs(11.5);
    expect(c.rS).toBe(11.5);
  });

  it("adjusting the support re-grows at the last seed", async () => {
    const h = harness();
    const c = new Controller(h.api);
    await c.loadImages();
    expect((await c.adjustRs(7)).kind).toBe("no-seed");
    await c.seedClick(2, 2);
    const out = await c.adjustRs(9);
    expect(out.kind).toBe("grown");
    expect(h.growCalls.length).toBe(2);
    expect(h.growCalls[1]?.r_s).toBe(9);
  });

  it("discards the stale grow when a newer one lands first", async () => {
    const first = deferred<GrowResponse>();
    const second = deferred<GrowResponse>();
    const pendingResponses = [first, second];
    const h = harness({ grow: async () => pendingResponses.shift()!.promise });
    const c = new Controller(h.api);
    await c.loadImages();

    const pA = c.seedClick(1, 1);
    const pB = c.seedClick(6, 4);
    second.resolve(growResp('{"w":8,"h":6,"runs":[[38,2]]}'));
    expect((await pB).kind).toBe("grown");
    first.resolve(growResp(BASE_RLE));
    expect((await pA).kind).toBe("stale");

    // overlay reflects the newest request only
    const m = c.pending!.composed();
    expect(m.data[38]).toBe(1);
    expect(m.data[9]).toBe(0);
    expect(c.lastSeed).toEqual([6, 4]);
  });

  it("surfaces service rejections without disturbing the layer", async () => {
    const h = harness({
      grow: async () => {
        throw new ApiError(409, "no-energy-peak", "flat image");
      },
    });
    const c = new Controller(h.api);
    await c.loadImages();
    const out = await c.seedClick(1, 1);
    expect(out.kind).toBe("rejected");
    if (out.kind === "rejected") {
      expect(out.error.kind).toBe("no-energy-peak");
      expect(out.error.status).toBe(409);
    }
    expect(c.pending).toBeNull();
    expect(c.lastGrow).toBeNull();
  });
});

describe("accept flow", () => {
  it("posts verified for an untouched grown mask", async () => {
    const h = harness();
    const c = new Controller(h.api);
    await c.loadImages();
    await c.seedClick(2, 1);
    const rec = await c.accept();
    expect(rec?.status).toBe("verified");
    expect(h.annotationCalls[0]).toEqual({
      image_id: "t0", target_id: 0, mask: BASE_RLE, status: "verified",
      seed: [2, 1], r_s: DEFAULT_RS,
    });
    expect(c.annotations.map((r) => r.target_id)).toEqual([0]);
    expect(c.dirty).toBe(false);
  });

  it("posts refined after brush edits and clears the dirty flag", async () => {
    const h = harness();
    const c = new Controller(h.api);
    await c.loadImages();
    await c.seedClick(2, 1);
    c.tool = "brush-add";
    c.brushRadius = 0;
    c.paintAt(0, 5);
    expect(c.dirty).toBe(true);
    const rec = await c.accept();
    expect(rec?.status).toBe("refined");
    const sent = decodeRle(h.annotationCalls[0]!.mask);
    expect(sent.data[5 * 8 + 0]).toBe(1);
    expect(maskArea(sent)).toBe(maskArea(decodeRle(BASE_RLE)) + 1);
    expect(c.dirty).toBe(false);
    // the accepted mask remains on screen
    expect(c.pending!.composed().data[5 * 8 + 0]).toBe(1);
  });

  it("numbers new targets after the server's records", async () => {
    const existing: AnnotationRecord = {
      v: 1, image_id: "t0", target_id: 2, mask: BASE_RLE, seed: null, r_s: null,
      status: "verified", edits: 0,
      created_at: "2026-01-01T00:00:00+00:00", updated_at: "2026-01-01T00:00:00+00:00",
      seq: 1,
    };
    const h = harness({ annotations: { t0: [existing] } });
    const c = new Controller(h.api);
    await c.loadImages();
    await c.seedClick(1, 1);
    await c.accept();
    expect(h.annotationCalls[0]?.target_id).toBe(3);
    await c.seedClick(5, 3);
    await c.accept();
    expect(h.annotationCalls[1]?.target_id).toBe(4);
  });

  it("does nothing without a mask", async () => {
    const h = harness();
    const c = new Controller(h.api);
    await c.loadImages();
    expect(await c.accept()).toBeNull();
    expect(h.annotationCalls.length).toBe(0);
  });
});

describe("keyboard and view state", () => {
  it("routes the review keys", async () => {
    const h = harness();
    const c = new Controller(h.api);
    await c.loadImages();
    expect(await c.handleKey("g")).toBeNull();
    await c.seedClick(2, 1);
    expect(await c.handleKey("g")).toBe("grown");
    expect(await c.handleKey("a")).toBe("accepted");
    expect(await c.handleKey("n")).toBe("next");
    expect(c.index).toBe(1);
    expect(await c.handleKey("p")).toBe("prev");
    expect(c.index).toBe(0);
    expect(await c.handleKey("z")).toBeNull();
  });

  it("reports a blocked navigation", async () => {
    const h = harness();
    const c = new Controller(h.api, () => false);
    await c.loadImages();
    await c.seedClick(2, 1);
    c.tool = "brush-erase";
    c.paintAt(2, 1);
    expect(await c.handleKey("n")).toBe("blocked");
  });

  it("clamps the detail center to the frame and keeps zoom presets", async () => {
    const h = harness();
    const c = new Controller(h.api);
    await c.loadImages();
    c.setDetailCenter(100, -3);
    expect(c.detailCenter).toEqual([7, 0]);
    expect(ZOOM_PRESETS).toEqual([4, 8, 16]);
    c.setZoom(16);
    expect(c.zoom).toBe(16);
  });

  it("starts from the documented defaults", () => {
    const c = new Controller(harness().api);
    expect(c.rS).toBe(20);
    expect(c.zoom).toBe(8);
    expect(c.connectivity).toBe(8);
    expect(c.variant).toBe("full");
    expect(c.tool).toBe("seed");
  });
});
