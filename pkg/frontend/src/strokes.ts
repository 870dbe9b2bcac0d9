import type { SketchDoc, StrokeDoc } from "./types.js";

const MIN_DISTINCT_DISTANCE = 1e-9;

/** Pointer samples of one in-progress stroke, in image coordinates. */
export class StrokeDraft {
  readonly samples: [number, number][] = [];

  constructor(public speedScale: number = 1.0) {}

  add(x: number, y: number): void {
    this.samples.push([x, y]);
  }

  /** At least two samples further than a hair apart can become a stroke. */
  distinctCount(): number {
    let count = 0;
    let last: [number, number] | null = null;
    for (const p of this.samples) {
      if (last === null || Math.hypot(p[0] - last[0], p[1] - last[1]) > MIN_DISTINCT_DISTANCE) {
        count++;
        last = p;
      }
    }
    return count;
  }

  isSubmittable(): boolean {
    return this.distinctCount() >= 2;
  }

  toStroke(): StrokeDoc {
    return {
      points: this.samples.map((p) => [p[0], p[1]] as [number, number]),
      speed_scale: this.speedScale,
    };
  }
}

/** True when at least one sample lands on a fluid pixel. A stroke fully
 * outside the mask is flagged in the UI and excluded from submission. */
export function strokeTouchesMask(
  stroke: StrokeDoc,
  maskTest: (x: number, y: number) => boolean,
): boolean {
  return stroke.points.some(([x, y]) => maskTest(x, y));
}

/**
 * The local stroke list. Every edit (add, undo, clear) rebuilds the full
 * document for submission: the service replaces, never appends, so the
 * client always holds the authoritative list and undo is a pop + re-PUT.
 */
export class SketchStore {
  private strokes: StrokeDoc[] = [];

  constructor(
    public imageWidth: number,
    public imageHeight: number,
  ) {}

  get count(): number {
    return this.strokes.length;
  }

  add(stroke: StrokeDoc): void {
    this.strokes.push(stroke);
  }

  undo(): StrokeDoc | undefined {
    return this.strokes.pop();
  }

  clear(): void {
    this.strokes = [];
  }

  buildDoc(): SketchDoc {
    return {
      canvas: { width: this.imageWidth, height: this.imageHeight },
      strokes: this.strokes.map((s) => ({
        points: s.points.map((p) => [p[0], p[1]] as [number, number]),
        speed_scale: s.speed_scale,
      })),
    };
  }
}
