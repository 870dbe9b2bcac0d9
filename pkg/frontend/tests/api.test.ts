import { describe, expect, it } from "vitest";

import { ServiceClient, ServiceError } from "../src/api.js";
import type { SketchDoc } from "../src/types.js";
import { buildStoredZip, pngStub } from "./helpers.js";

interface Call {
  url: string;
  init?: RequestInit;
}

function jsonResponse(status: number, body: unknown, headers: Record<string, string> = {}) {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json", ...headers },
  });
}

function normalizeTo20(doc: SketchDoc): SketchDoc {
  // stand-in for the server's 20-point arc resampling
  return {
    canvas: doc.canvas,
    strokes: doc.strokes.map((s) => {
      const [x0, y0] = s.points[0];
      const [x1, y1] = s.points[s.points.length - 1];
      const points: [number, number][] = [];
      for (let i = 0; i < 20; i++) {
        const t = i / 19;
        points.push([x0 + (x1 - x0) * t, y0 + (y1 - y0) * t]);
      }
      return { points, speed_scale: s.speed_scale };
    }),
  };
}

describe("ServiceClient", () => {
  it("a drawn stroke becomes a PUT whose normalized response has 20 points", async () => {
    const calls: Call[] = [];
    let version = 1;
    const fetchImpl = (async (url: RequestInfo | URL, init?: RequestInit) => {
      calls.push({ url: String(url), init });
      const doc = JSON.parse(String(init!.body)) as SketchDoc;
      version += 1;
      return jsonResponse(200, { version, sketches: normalizeTo20(doc) });
    }) as typeof fetch;

    const client = new ServiceClient("", fetchImpl);
    // a drag of 57 pointer samples
    const samples: [number, number][] = [];
    for (let i = 0; i < 57; i++) samples.push([10 + i * 2, 40 + Math.sin(i / 9) * 5]);
    const resp = await client.putSketches("s1", {
      canvas: { width: 640, height: 480 },
      strokes: [{ points: samples, speed_scale: 1.2 }],
    });

    expect(calls).toHaveLength(1);
    expect(calls[0].url).toBe("/sessions/s1/sketches");
    expect(calls[0].init?.method).toBe("PUT");
    const sent = JSON.parse(String(calls[0].init?.body)) as SketchDoc;
    expect(sent.strokes[0].points).toHaveLength(57); // full raw list submitted
    expect(resp.version).toBe(2);
    expect(resp.sketches.strokes[0].points).toHaveLength(20);
  });

  it("surfaces service errors with their JSON message", async () => {
    const fetchImpl = (async () =>
      jsonResponse(409, { error: "no sketches submitted yet" })) as typeof fetch;
    const client = new ServiceClient("", fetchImpl);
    await expect(client.getFieldPng("s1")).rejects.toThrowError(
      new ServiceError(409, "no sketches submitted yet"),
    );
  });

  it("preview fetches exactly N frames from the zip response", async () => {
    const frameCount = 6;
    const entries = Array.from({ length: frameCount }, (_, n) => ({
      name: `frame_${String(n).padStart(4, "0")}.png`,
      data: pngStub(n),
    }));
    const fetched: string[] = [];
    const fetchImpl = (async (url: RequestInfo | URL) => {
      fetched.push(String(url));
      return new Response(buildStoredZip(entries), {
        status: 200,
        headers: {
          "Content-Type": "application/zip",
          "X-Session-Version": "3",
          "X-Cache": "miss",
        },
      });
    }) as typeof fetch;

    const client = new ServiceClient("", fetchImpl);
    const result = await client.getPreview("s1", frameCount);
    expect(fetched).toEqual([`/sessions/s1/preview?frames=${frameCount}`]);
    expect(result.frames).toHaveLength(frameCount);
    expect(result.version).toBe(3);
    expect(result.cache).toBe("miss");
    // displayed bytes are exactly the service's response bytes
    const firstBytes = new Uint8Array(await result.frames[0].arrayBuffer());
    expect(Array.from(firstBytes)).toEqual(Array.from(pngStub(0)));
  });

  it("a newer preview request aborts the one in flight", async () => {
    const entries = [{ name: "frame_0000.png", data: pngStub(0) }, { name: "frame_0001.png", data: pngStub(1) }];
    let firstSignal: AbortSignal | undefined;
    let callIndex = 0;
    const fetchImpl = (async (_url: RequestInfo | URL, init?: RequestInit) => {
      callIndex += 1;
      if (callIndex === 1) {
        firstSignal = init?.signal ?? undefined;
        return new Promise<Response>((_resolve, reject) => {
          init?.signal?.addEventListener("abort", () =>
            reject(new DOMException("aborted", "AbortError")),
          );
        });
      }
      return new Response(buildStoredZip(entries), { status: 200 });
    }) as typeof fetch;

    const client = new ServiceClient("", fetchImpl);
    const first = client.getPreview("s1", 2);
    const second = client.getPreview("s1", 2);
    await expect(first).rejects.toHaveProperty("name", "AbortError");
    expect(firstSignal?.aborted).toBe(true);
    const result = await second;
    expect(result.frames).toHaveLength(2);
  });

  it("creates sessions via multipart form", async () => {
    const calls: Call[] = [];
    const fetchImpl = (async (url: RequestInfo | URL, init?: RequestInit) => {
      calls.push({ url: String(url), init });
      return jsonResponse(201, { id: "abc123" });
    }) as typeof fetch;
    const client = new ServiceClient("http://svc", fetchImpl);
    const id = await client.createSession(new Blob([pngStub(1) as BlobPart]), new Blob([pngStub(2) as BlobPart]));
    expect(id).toBe("abc123");
    expect(calls[0].url).toBe("http://svc/sessions");
    const form = calls[0].init?.body as FormData;
    expect(form.has("image")).toBe(true);
    expect(form.has("mask")).toBe(true);
  });
});
