import type { PreviewResult, PutSketchesResponse, SketchDoc } from "./types.js";
import { readStoredZip } from "./zip.js";

export class ServiceError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function errorOf(resp: Response): Promise<ServiceError> {
  let message = `${resp.status}`;
  try {
    const body = await resp.json();
    if (body && typeof body.error === "string") message = body.error;
  } catch {
    /* non-JSON error body; keep the status text */
  }
  return new ServiceError(resp.status, message);
}

/**
 * Typed client for the session service. The fetch implementation is
 * injectable so tests can intercept every request and prove that all
 * displayed field/preview bytes come from service responses.
 */
export class ServiceClient {
  private previewAbort: AbortController | null = null;

  constructor(
    private baseUrl: string = "",
    private fetchImpl: typeof fetch = fetch.bind(globalThis),
  ) {}

  async createSession(image: Blob, mask: Blob): Promise<string> {
    const form = new FormData();
    form.append("image", image, "image.png");
    form.append("mask", mask, "mask.png");
    const resp = await this.fetchImpl(`${this.baseUrl}/sessions`, {
      method: "POST",
      body: form,
    });
    if (resp.status !== 201) throw await errorOf(resp);
    const body = await resp.json();
    return body.id as string;
  }

  async putSketches(sessionId: string, doc: SketchDoc): Promise<PutSketchesResponse> {
    const resp = await this.fetchImpl(`${this.baseUrl}/sessions/${sessionId}/sketches`, {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(doc),
    });
    if (!resp.ok) throw await errorOf(resp);
    return (await resp.json()) as PutSketchesResponse;
  }

  async getFieldPng(sessionId: string): Promise<{ bytes: Blob; version: number }> {
    const resp = await this.fetchImpl(
      `${this.baseUrl}/sessions/${sessionId}/field?format=png`,
    );
    if (!resp.ok) throw await errorOf(resp);
    return {
      bytes: await resp.blob(),
      version: Number(resp.headers.get("X-Session-Version") ?? "0"),
    };
  }

  async getStreamlines(sessionId: string): Promise<SketchDoc> {
    const resp = await this.fetchImpl(`${this.baseUrl}/sessions/${sessionId}/streamlines`);
    if (!resp.ok) throw await errorOf(resp);
    return (await resp.json()) as SketchDoc;
  }

  /**
   * Fetch a loop preview. At most one request is in flight: starting a
   * new one aborts the previous, so a stale render can never clobber a
   * newer one.
   */
  async getPreview(sessionId: string, frames: number): Promise<PreviewResult> {
    this.previewAbort?.abort();
    const abort = new AbortController();
    this.previewAbort = abort;
    const resp = await this.fetchImpl(
      `${this.baseUrl}/sessions/${sessionId}/preview?frames=${frames}`,
      { signal: abort.signal },
    );
    if (!resp.ok) throw await errorOf(resp);
    const entries = readStoredZip(await resp.arrayBuffer());
    entries.sort((a, b) => a.name.localeCompare(b.name));
    return {
      frames: entries.map((e) => new Blob([e.data as BlobPart], { type: "image/png" })),
      version: Number(resp.headers.get("X-Session-Version") ?? "0"),
      cache: resp.headers.get("X-Cache") ?? "",
    };
  }
}
