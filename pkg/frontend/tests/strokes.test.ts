import { describe, expect, it } from "vitest";

import { SketchStore, StrokeDraft, strokeTouchesMask } from "../src/strokes.js";

describe("StrokeDraft", () => {
  it("requires two distinct samples to submit", () => {
    const draft = new StrokeDraft();
    draft.add(5, 5);
    expect(draft.isSubmittable()).toBe(false); // click without drag
    draft.add(5, 5);
    expect(draft.isSubmittable()).toBe(false); // still one distinct point
    draft.add(6.5, 5);
    expect(draft.isSubmittable()).toBe(true);
  });

  it("keeps raw samples and the speed slider value", () => {
    const draft = new StrokeDraft(2.5);
    for (let i = 0; i < 57; i++) draft.add(i, 10 + Math.sin(i / 5));
    const stroke = draft.toStroke();
    expect(stroke.points).toHaveLength(57);
    expect(stroke.speed_scale).toBe(2.5);
  });
});

describe("strokeTouchesMask", () => {
  const insideCircle = (x: number, y: number) => Math.hypot(x - 50, y - 50) < 20;

  it("accepts strokes with at least one sample in the mask", () => {
    const stroke = { points: [[10, 10], [50, 50]] as [number, number][], speed_scale: 1 };
    expect(strokeTouchesMask(stroke, insideCircle)).toBe(true);
  });

  it("flags strokes fully outside the mask", () => {
    const stroke = { points: [[1, 1], [5, 2], [9, 3]] as [number, number][], speed_scale: 1 };
    expect(strokeTouchesMask(stroke, insideCircle)).toBe(false);
  });
});

describe("SketchStore", () => {
  it("builds the full-list document for replace semantics", () => {
    const store = new SketchStore(640, 480);
    store.add({ points: [[0, 0], [10, 0]], speed_scale: 1 });
    store.add({ points: [[5, 5], [5, 25]], speed_scale: 2 });
    const doc = store.buildDoc();
    expect(doc.canvas).toEqual({ width: 640, height: 480 });
    expect(doc.strokes).toHaveLength(2);
    expect(doc.strokes[1].speed_scale).toBe(2);
  });

  it("undo pops the last stroke so a re-PUT shrinks the list", () => {
    const store = new SketchStore(64, 64);
    store.add({ points: [[0, 0], [1, 1]], speed_scale: 1 });
    store.add({ points: [[2, 2], [3, 3]], speed_scale: 1 });
    store.undo();
    expect(store.count).toBe(1);
    expect(store.buildDoc().strokes[0].points[0]).toEqual([0, 0]);
  });

  it("documents are deep copies, not views of internal state", () => {
    const store = new SketchStore(64, 64);
    store.add({ points: [[0, 0], [1, 1]], speed_scale: 1 });
    const doc = store.buildDoc();
    doc.strokes[0].points[0][0] = 99;
    expect(store.buildDoc().strokes[0].points[0][0]).toBe(0);
  });
});
