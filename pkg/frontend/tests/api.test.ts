// Client wire behavior against a recorded fetch, and the grow gate's
// stale-response discipline.

import { describe, expect, it } from "vitest";

import { ApiError, Client, GrowGate } from "../src/api.js";

interface Call {
  url: string;
  init?: RequestInit;
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

function recordingClient(responses: Response[]): { client: Client; calls: Call[] } {
  const calls: Call[] = [];
  const client = new Client("http://svc", async (url, init) => {
    calls.push({ url, init });
    const next = responses.shift();
    if (!next) throw new Error("unexpected extra request");
    return next;
  });
  return { client, calls };
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

describe("Client requests", () => {
  it("lists images by unwrapping the envelope", async () => {
    const { client, calls } = recordingClient([
      jsonResponse(200, { v: 1, images: [{ id: "t0", width: 64, height: 48, sequence: 0 }] }),
    ]);
    const images = await client.listImages();
    expect(images).toEqual([{ id: "t0", width: 64, height: 48, sequence: 0 }]);
    expect(calls[0]?.url).toBe("http://svc/images");
  });

  it("posts /grow with protocol version and parameters", async () => {
    const { client, calls } = recordingClient([
      jsonResponse(200, {
        v: 1, mask: '{"w":2,"h":1,"runs":[[0,1]]}', k_star: 0,
        energies: [null], geometry: { area: 1, centroid: [0, 0], equiv_radius: 0.56 },
        inverted: false,
      }),
    ]);
    const resp = await client.grow({
      image_id: "t0", seed: [5, 6], r_s: 12, connectivity: 4, variant: "no_saliency",
    });
    expect(resp.k_star).toBe(0);
    const call = calls[0]!;
    expect(call.url).toBe("http://svc/grow");
    expect(call.init?.method).toBe("POST");
    expect(JSON.parse(String(call.init?.body))).toEqual({
      v: 1, image_id: "t0", seed: [5, 6], r_s: 12, connectivity: 4, variant: "no_saliency",
    });
  });

  it("builds image URLs with view and crop", () => {
    const client = new Client("http://svc", async () => jsonResponse(200, {}));
    expect(client.imageUrl("t0")).toBe("http://svc/images/t0?view=raw");
    expect(client.imageUrl("t0", "clahe")).toBe("http://svc/images/t0?view=clahe");
    expect(client.imageUrl("t0", "pseudocolor", { x: 3, y: 4, w: 10, h: 12 }))
      .toBe("http://svc/images/t0?view=pseudocolor&crop=3%2C4%2C10%2C12");
  });

  it("scopes annotation listing to an image when asked", async () => {
    const { client, calls } = recordingClient([
      jsonResponse(200, { v: 1, records: [] }),
      jsonResponse(200, { v: 1, records: [] }),
    ]);
    await client.listAnnotations();
    await client.listAnnotations("frame with space");
    expect(calls[0]?.url).toBe("http://svc/annotations");
    expect(calls[1]?.url).toBe("http://svc/annotations?image_id=frame%20with%20space");
  });

  it("omits the export path unless given", async () => {
    const { client, calls } = recordingClient([
      jsonResponse(200, { v: 1, format: "png-dir", path: "/x", count: 0 }),
      jsonResponse(200, { v: 1, format: "rle-jsonl", path: "/y", count: 0 }),
    ]);
    await client.exportAnnotations("png-dir");
    await client.exportAnnotations("rle-jsonl", "/tmp/out.jsonl");
    expect(JSON.parse(String(calls[0]?.init?.body))).toEqual({ v: 1, format: "png-dir" });
    expect(JSON.parse(String(calls[1]?.init?.body)))
      .toEqual({ v: 1, format: "rle-jsonl", out: "/tmp/out.jsonl" });
  });
});

describe("Client error mapping", () => {
  it("maps the flat error envelope to kind and detail", async () => {
    const { client } = recordingClient([
      jsonResponse(409, { v: 1, error: "no-energy-peak", detail: "no finite energy" }),
    ]);
    const err = await client.grow({ image_id: "t0", seed: [0, 0] }).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
    expect(err.kind).toBe("no-energy-peak");
    expect(err.detail).toBe("no finite energy");
  });

  it("labels schema validation bodies without an error field", async () => {
    const { client } = recordingClient([
      jsonResponse(422, { detail: [{ loc: ["body", "status"], msg: "bad literal" }] }),
    ]);
    const err = await client.postAnnotation({
      image_id: "t0", target_id: 0, mask: "{}", status: "auto",
    }).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.kind).toBe("validation-error");
    expect(err.status).toBe(422);
  });

  it("falls back to the status text for non-JSON bodies", async () => {
    const { client } = recordingClient([
      new Response("<html>boom</html>", { status: 500, statusText: "Internal Server Error" }),
    ]);
    const err = await client.listImages().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.kind).toBe("http-error");
    expect(err.detail).toBe("Internal Server Error");
  });
});

describe("GrowGate", () => {
  it("resolves a lone request and settles busy", async () => {
    const gate = new GrowGate();
    expect(gate.busy).toBe(false);
    const out = await gate.run(async () => 41);
    expect(out).toBe(41);
    expect(gate.busy).toBe(false);
    expect(gate.latest).toBe(1);
  });

  it("discards the stale response when a newer request lands first", async () => {
    const gate = new GrowGate();
    const slow = deferred<string>();
    const fast = deferred<string>();
    const signals: AbortSignal[] = [];
    const pA = gate.run((signal) => {
      signals.push(signal);
      return slow.promise;
    });
    const pB = gate.run((signal) => {
      signals.push(signal);
      return fast.promise;
    });
    // the older request is aborted the moment the newer one starts
    expect(signals[0]?.aborted).toBe(true);
    expect(signals[1]?.aborted).toBe(false);
    fast.resolve("new");
    expect(await pB).toBe("new");
    slow.resolve("old");
    expect(await pA).toBeNull();
    expect(gate.latest).toBe(2);
    expect(gate.busy).toBe(false);
  });

  it("swallows failures from superseded requests", async () => {
    const gate = new GrowGate();
    const slow = deferred<string>();
    const pA = gate.run(() => slow.promise);
    const pB = gate.run(async () => "ok");
    expect(await pB).toBe("ok");
    slow.reject(new Error("aborted"));
    expect(await pA).toBeNull();
  });

  it("propagates failures from the newest request", async () => {
    const gate = new GrowGate();
    await expect(gate.run(async () => {
      throw new Error("boom");
    })).rejects.toThrow("boom");
    expect(gate.busy).toBe(false);
  });

  it("keeps sequential requests independent", async () => {
    const gate = new GrowGate();
    expect(await gate.run(async () => 1)).toBe(1);
    expect(await gate.run(async () => 2)).toBe(2);
    expect(gate.latest).toBe(2);
  });
});
