/**
 * Cyclic frame scheduling for the loop preview.
 *
 * Pure index arithmetic lives here so the wrap behavior is testable
 * without a DOM: the frame after N-1 is 0 with no pause and no duplicate,
 * which is exactly what makes the rendered loop seamless (frame 0 is also
 * the closing frame of the cycle).
 */
export class LoopPlayer {
  private index = 0;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    public frameCount: number,
    public fps: number = 20,
  ) {
    if (!Number.isInteger(frameCount) || frameCount < 1) {
      throw new Error(`frameCount must be a positive integer, got ${frameCount}`);
    }
    if (!(fps > 0) || !isFinite(fps)) {
      throw new Error(`fps must be positive, got ${fps}`);
    }
  }

  get current(): number {
    return this.index;
  }

  /** Advance one frame and return the new index. */
  tick(): number {
    this.index = (this.index + 1) % this.frameCount;
    return this.index;
  }

  /** Loop period in seconds at the current fps. */
  periodSeconds(): number {
    return this.frameCount / this.fps;
  }

  get playing(): boolean {
    return this.timer !== null;
  }

  play(onFrame: (index: number) => void): void {
    this.stop();
    onFrame(this.index);
    this.timer = setInterval(() => onFrame(this.tick()), 1000 / this.fps);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  reset(): void {
    this.index = 0;
  }
}
