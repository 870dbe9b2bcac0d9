import { ServiceClient, ServiceError } from "./api.js";
import { CanvasMapper } from "./coords.js";
import { drawStrokeOverlays, drawWheelLegend } from "./overlay.js";
import { LoopPlayer } from "./player.js";
import { SketchStore, StrokeDraft, strokeTouchesMask } from "./strokes.js";
import type { SketchDoc } from "./types.js";

const VIEW_W = 720;
const VIEW_H = 540;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

class StudioApp {
  private client = new ServiceClient("");
  private sessionId: string | null = null;
  private mapper = new CanvasMapper();
  private store: SketchStore | null = null;
  private normalized: SketchDoc | null = null;
  private maskData: ImageData | null = null;
  private imageBitmap: ImageBitmap | null = null;
  private fieldBitmap: ImageBitmap | null = null;
  private draft: StrokeDraft | null = null;
  private player: LoopPlayer | null = null;
  private previewBitmaps: ImageBitmap[] = [];

  private layers = {
    image: el<HTMLCanvasElement>("layer-image"),
    mask: el<HTMLCanvasElement>("layer-mask"),
    field: el<HTMLCanvasElement>("layer-field"),
    strokes: el<HTMLCanvasElement>("layer-strokes"),
    preview: el<HTMLCanvasElement>("layer-preview"),
    input: el<HTMLCanvasElement>("layer-input"),
  };

  constructor() {
    for (const canvas of Object.values(this.layers)) {
      canvas.width = VIEW_W;
      canvas.height = VIEW_H;
    }
    drawWheelLegend(el<HTMLCanvasElement>("legend").getContext("2d")!, 96);
    this.bind();
    this.setStatus("load an image and a mask, then open a session");
  }

  private ctx(name: keyof typeof this.layers): CanvasRenderingContext2D {
    return this.layers[name].getContext("2d")!;
  }

  private setStatus(text: string) {
    el<HTMLSpanElement>("status").textContent = text;
  }

  private setHint(text: string) {
    el<HTMLSpanElement>("hint").textContent = text;
    if (text) setTimeout(() => el<HTMLSpanElement>("hint").textContent = "", 4000);
  }

  private bind() {
    el<HTMLButtonElement>("open-session").addEventListener("click", () => void this.openSession());
    el<HTMLButtonElement>("undo").addEventListener("click", () => void this.undoStroke());
    el<HTMLButtonElement>("clear").addEventListener("click", () => void this.clearStrokes());
    el<HTMLButtonElement>("preview").addEventListener("click", () => void this.startPreview());
    el<HTMLButtonElement>("stop").addEventListener("click", () => this.stopPreview());
    el<HTMLInputElement>("field-toggle").addEventListener("change", () => void this.refreshField());
    el<HTMLInputElement>("field-opacity").addEventListener("input", () => this.paintField());

    const input = this.layers.input;
    input.addEventListener("pointerdown", (ev) => this.pointerDown(ev));
    input.addEventListener("pointermove", (ev) => this.pointerMove(ev));
    input.addEventListener("pointerup", (ev) => void this.pointerUp(ev));
    input.addEventListener("pointercancel", () => (this.draft = null));
  }

  // -- session ------------------------------------------------------------

  private async openSession() {
    const imageFile = el<HTMLInputElement>("image-file").files?.[0];
    const maskFile = el<HTMLInputElement>("mask-file").files?.[0];
    if (!imageFile || !maskFile) {
      this.setHint("choose both an image PNG and a mask PNG");
      return;
    }
    this.stopPreview();
    try {
      this.sessionId = await this.client.createSession(imageFile, maskFile);
    } catch (err) {
      this.setHint(err instanceof ServiceError ? err.message : String(err));
      return;
    }
    this.imageBitmap = await createImageBitmap(imageFile);
    const maskBitmap = await createImageBitmap(maskFile);
    this.mapper = CanvasMapper.fit(this.imageBitmap.width, this.imageBitmap.height, VIEW_W, VIEW_H);
    this.store = new SketchStore(this.imageBitmap.width, this.imageBitmap.height);
    this.normalized = null;
    this.fieldBitmap = null;

    // keep the mask readable per-pixel for the outside-the-fluid check
    const probe = document.createElement("canvas");
    probe.width = maskBitmap.width;
    probe.height = maskBitmap.height;
    const probeCtx = probe.getContext("2d")!;
    probeCtx.drawImage(maskBitmap, 0, 0);
    this.maskData = probeCtx.getImageData(0, 0, probe.width, probe.height);

    this.paintBase(maskBitmap);
    this.paintStrokes();
    this.paintField();
    this.setStatus(`session ${this.sessionId.slice(0, 8)}… — draw strokes inside the tinted fluid region`);
  }

  private maskTest = (x: number, y: number): boolean => {
    const data = this.maskData;
    if (!data) return false;
    const ix = Math.round(x);
    const iy = Math.round(y);
    if (ix < 0 || iy < 0 || ix >= data.width || iy >= data.height) return false;
    return data.data[(iy * data.width + ix) * 4] > 127;
  };

  private paintBase(maskBitmap: ImageBitmap) {
    const img = this.ctx("image");
    img.clearRect(0, 0, VIEW_W, VIEW_H);
    if (this.imageBitmap) this.drawMapped(img, this.imageBitmap);
    const mask = this.ctx("mask");
    mask.clearRect(0, 0, VIEW_W, VIEW_H);
    mask.globalAlpha = 0.25;
    this.drawMapped(mask, maskBitmap);
    mask.globalAlpha = 1.0;
  }

  private drawMapped(ctx: CanvasRenderingContext2D, bitmap: ImageBitmap) {
    const [x, y] = this.mapper.toCanvas(0, 0);
    ctx.drawImage(bitmap, x, y, bitmap.width * this.mapper.zoom, bitmap.height * this.mapper.zoom);
  }

  // -- strokes ------------------------------------------------------------

  private pointerDown(ev: PointerEvent) {
    if (!this.sessionId || !this.store) return;
    this.layers.input.setPointerCapture(ev.pointerId);
    const speed = Number(el<HTMLInputElement>("speed").value);
    this.draft = new StrokeDraft(speed);
    const [x, y] = this.mapper.toImage(ev.offsetX, ev.offsetY);
    this.draft.add(x, y);
  }

  private pointerMove(ev: PointerEvent) {
    if (!this.draft) return;
    const [x, y] = this.mapper.toImage(ev.offsetX, ev.offsetY);
    this.draft.add(x, y);
    this.paintStrokes();
    const ctx = this.ctx("strokes");
    ctx.save();
    ctx.strokeStyle = "rgba(255, 255, 160, 0.9)";
    ctx.lineWidth = 2;
    ctx.beginPath();
    this.draft.samples.forEach(([px, py], i) => {
      const [cx, cy] = this.mapper.toCanvas(px, py);
      if (i === 0) ctx.moveTo(cx, cy);
      else ctx.lineTo(cx, cy);
    });
    ctx.stroke();
    ctx.restore();
  }

  private async pointerUp(ev: PointerEvent) {
    const draft = this.draft;
    this.draft = null;
    if (!draft || !this.store || !this.sessionId) return;
    const [x, y] = this.mapper.toImage(ev.offsetX, ev.offsetY);
    draft.add(x, y);
    if (!draft.isSubmittable()) {
      this.setHint("click-without-drag: drag to draw a motion stroke");
      this.paintStrokes();
      return;
    }
    const stroke = draft.toStroke();
    if (!strokeTouchesMask(stroke, this.maskTest)) {
      this.setHint("stroke is outside the fluid mask and was not submitted");
      this.paintStrokes();
      return;
    }
    this.store.add(stroke);
    await this.submitStrokes();
  }

  private async undoStroke() {
    if (!this.store || this.store.count === 0) return;
    this.store.undo();
    await this.submitStrokes();
  }

  private async clearStrokes() {
    if (!this.store) return;
    this.store.clear();
    await this.submitStrokes();
  }

  private async submitStrokes() {
    // replace semantics: always PUT the full list, including an empty one,
    // so undoing the last stroke really removes it server-side
    if (!this.store || !this.sessionId) return;
    try {
      const resp = await this.client.putSketches(this.sessionId, this.store.buildDoc());
      this.normalized = resp.sketches;
      this.setStatus(`version ${resp.version}: ${resp.sketches.strokes.length} stroke(s), 20 points each`);
    } catch (err) {
      this.setHint(err instanceof ServiceError ? err.message : String(err));
      return;
    }
    this.paintStrokes();
    await this.refreshField();
  }

  private paintStrokes() {
    const ctx = this.ctx("strokes");
    ctx.clearRect(0, 0, VIEW_W, VIEW_H);
    if (this.normalized) drawStrokeOverlays(ctx, this.normalized, this.mapper);
  }

  // -- field overlay --------------------------------------------------------

  private async refreshField() {
    const enabled = el<HTMLInputElement>("field-toggle").checked;
    if (!enabled || !this.sessionId) {
      this.fieldBitmap = null;
      this.paintField();
      return;
    }
    try {
      const { bytes } = await this.client.getFieldPng(this.sessionId);
      this.fieldBitmap = await createImageBitmap(bytes);
    } catch (err) {
      if (err instanceof ServiceError && err.status === 409) {
        this.setHint("draw a stroke first to synthesize a field");
      }
      this.fieldBitmap = null;
    }
    this.paintField();
  }

  private paintField() {
    const ctx = this.ctx("field");
    ctx.clearRect(0, 0, VIEW_W, VIEW_H);
    if (!this.fieldBitmap) return;
    ctx.globalAlpha = Number(el<HTMLInputElement>("field-opacity").value);
    this.drawMapped(ctx, this.fieldBitmap);
    ctx.globalAlpha = 1.0;
  }

  // -- preview --------------------------------------------------------------

  private async startPreview() {
    if (!this.sessionId) return;
    const frames = Number(el<HTMLInputElement>("frames").value);
    const fps = Number(el<HTMLInputElement>("fps").value);
    this.stopPreview();
    this.setStatus(`rendering ${frames} frames…`);
    let result;
    try {
      result = await this.client.getPreview(this.sessionId, frames);
    } catch (err) {
      if ((err as Error).name === "AbortError") return; // superseded
      this.setHint(
        err instanceof ServiceError && err.status === 409
          ? "draw a stroke first, then preview"
          : String(err),
      );
      this.setStatus("preview failed");
      return;
    }
    this.previewBitmaps = await Promise.all(result.frames.map((b) => createImageBitmap(b)));
    this.player = new LoopPlayer(this.previewBitmaps.length, fps);
    const ctx = this.ctx("preview");
    this.player.play((index) => {
      ctx.clearRect(0, 0, VIEW_W, VIEW_H);
      this.drawMapped(ctx, this.previewBitmaps[index]);
    });
    this.setStatus(
      `looping ${this.previewBitmaps.length} frames at ${fps} fps ` +
      `(period ${this.player.periodSeconds().toFixed(1)} s, cache ${result.cache})`,
    );
  }

  private stopPreview() {
    this.player?.stop();
    this.player = null;
    this.ctx("preview").clearRect(0, 0, VIEW_W, VIEW_H);
  }
}

window.addEventListener("DOMContentLoaded", () => new StudioApp());
