/**
 * Mapping between canvas (screen) coordinates and image coordinates.
 *
 * The image is drawn scaled by `zoom` with its top-left corner at
 * (offsetX, offsetY) in canvas space. Both directions are exact affine
 * transforms, so a round trip stays well under half a pixel at any zoom.
 */
export class CanvasMapper {
  constructor(
    public zoom: number = 1,
    public offsetX: number = 0,
    public offsetY: number = 0,
  ) {
    if (!(zoom > 0) || !isFinite(zoom)) {
      throw new Error(`zoom must be a positive number, got ${zoom}`);
    }
  }

  toImage(canvasX: number, canvasY: number): [number, number] {
    return [(canvasX - this.offsetX) / this.zoom, (canvasY - this.offsetY) / this.zoom];
  }

  toCanvas(imageX: number, imageY: number): [number, number] {
    return [imageX * this.zoom + this.offsetX, imageY * this.zoom + this.offsetY];
  }

  /** Zoom that fits an image into a viewport, preserving aspect. */
  static fit(
    imageW: number,
    imageH: number,
    viewW: number,
    viewH: number,
  ): CanvasMapper {
    const zoom = Math.min(viewW / imageW, viewH / imageH);
    const offsetX = (viewW - imageW * zoom) / 2;
    const offsetY = (viewH - imageH * zoom) / 2;
    return new CanvasMapper(zoom, offsetX, offsetY);
  }
}
