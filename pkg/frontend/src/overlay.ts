import { CanvasMapper } from "./coords.js";
import type { SketchDoc } from "./types.js";

const GRADIENT_START = 255;
const GRADIENT_END = 64;

/**
 * Draw the service's normalized strokes as gradient polylines: bright at
 * the stroke start, darkening toward the end, mirroring how the sketches
 * are rasterized for the motion synthesizer (bright end = upstream).
 */
export function drawStrokeOverlays(
  ctx: CanvasRenderingContext2D,
  sketches: SketchDoc,
  mapper: CanvasMapper,
  lineWidth = 3,
): void {
  ctx.save();
  ctx.lineWidth = lineWidth;
  ctx.lineCap = "round";
  for (const stroke of sketches.strokes) {
    const pts = stroke.points;
    if (pts.length < 2) continue;
    const gaps: number[] = [];
    let total = 0;
    for (let i = 1; i < pts.length; i++) {
      const d = Math.hypot(pts[i][0] - pts[i - 1][0], pts[i][1] - pts[i - 1][1]);
      gaps.push(d);
      total += d;
    }
    let acc = 0;
    for (let i = 0; i < pts.length - 1; i++) {
      const t0 = total > 0 ? acc / total : 0;
      acc += gaps[i];
      const t1 = total > 0 ? acc / total : 0;
      const [x0, y0] = mapper.toCanvas(pts[i][0], pts[i][1]);
      const [x1, y1] = mapper.toCanvas(pts[i + 1][0], pts[i + 1][1]);
      const grad = ctx.createLinearGradient(x0, y0, x1, y1);
      grad.addColorStop(0, grayAt(t0));
      grad.addColorStop(1, grayAt(t1));
      ctx.strokeStyle = grad;
      ctx.beginPath();
      ctx.moveTo(x0, y0);
      ctx.lineTo(x1, y1);
      ctx.stroke();
    }
  }
  ctx.restore();
}

function grayAt(t: number): string {
  const level = Math.round(GRADIENT_START + (GRADIENT_END - GRADIENT_START) * t);
  return `rgb(${level}, ${level}, ${level})`;
}

// 55-entry direction color wheel used by the field renderer; reproduced
// here only to label the legend (the field image itself always comes from
// the service).
function wheelColors(): [number, number, number][] {
  const sizes = [15, 6, 4, 11, 13, 6];
  const colors: [number, number, number][] = [];
  const ramps: ((t: number) => [number, number, number])[] = [
    (t) => [1, t, 0],
    (t) => [1 - t, 1, 0],
    (t) => [0, 1, t],
    (t) => [0, 1 - t, 1],
    (t) => [t, 0, 1],
    (t) => [1, 0, 1 - t],
  ];
  sizes.forEach((n, seg) => {
    for (let i = 0; i < n; i++) colors.push(ramps[seg](i / n));
  });
  return colors;
}

/** Render the direction legend: hue by angle, white at zero speed. */
export function drawWheelLegend(ctx: CanvasRenderingContext2D, size: number): void {
  const wheel = wheelColors();
  const ncols = wheel.length;
  const image = ctx.createImageData(size, size);
  const c = (size - 1) / 2;
  for (let y = 0; y < size; y++) {
    for (let x = 0; x < size; x++) {
      const dx = (x - c) / c;
      const dy = (y - c) / c;
      const rad = Math.hypot(dx, dy);
      const offset = (y * size + x) * 4;
      if (rad > 1) {
        image.data[offset + 3] = 0;
        continue;
      }
      const angle = Math.atan2(-dy, -dx) / Math.PI;
      const fk = ((angle + 1) / 2) * (ncols - 1);
      const k0 = Math.floor(fk);
      const k1 = (k0 + 1) % ncols;
      const f = fk - k0;
      for (let ch = 0; ch < 3; ch++) {
        const col = wheel[k0][ch] * (1 - f) + wheel[k1][ch] * f;
        image.data[offset + ch] = Math.floor(255 * (1 - rad * (1 - col)));
      }
      image.data[offset + 3] = 255;
    }
  }
  ctx.putImageData(image, 0, 0);
}
