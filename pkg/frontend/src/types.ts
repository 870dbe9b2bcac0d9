export interface StrokeDoc {
  points: [number, number][];
  speed_scale: number;
}

export interface SketchDoc {
  canvas: { width: number; height: number };
  strokes: StrokeDoc[];
}

export interface PutSketchesResponse {
  version: number;
  sketches: SketchDoc;
}

export interface PreviewResult {
  frames: Blob[];
  version: number;
  cache: string;
}
