"""Dense motion-field synthesis from sketched strokes.

Turns direction-bearing strokes into a full per-pixel velocity field so
the pipeline runs end to end from hand input alone: every stroke segment
drops a velocity sample (unit direction times the stroke's speed_scale),
and each masked pixel blends the samples with Gaussian weights on its
distance to each segment. Pixels beyond the reach of every weight take
the velocity of the nearest segment outright.
"""

from __future__ import annotations

import numpy as np

from .fields import FluidMask, MotionField
from .streamline import STROKE_POINT_COUNT, MotionSketchSet, prepare_motion_stroke

FALLBACK_WEIGHT = 1e-12


def synthesize_field(
    sketches: MotionSketchSet,
    mask: FluidMask,
    sigma: float = 25.0,
) -> MotionField:
    """Propagate stroke velocities over the mask by Gaussian segment distance.

    Strokes are normalized to 20 points first (already-prepared strokes pass
    through untouched). For masked pixel p and segments k:

        v(p) = sum_k w_k v_k / sum_k w_k,   w_k = exp(-d(p, seg_k)^2 / (2 sigma^2))

    with d the point-to-segment distance. Unmasked pixels are exactly zero.
    """
    if not sketches.strokes:
        raise ValueError("sketch set has no strokes")
    if not (np.isfinite(sigma) and sigma > 0.0):
        raise ValueError(f"sigma must be positive, got {sigma}")
    w, h = sketches.canvas
    if (mask.width, mask.height) != (w, h):
        raise ValueError(
            f"mask {mask.width}x{mask.height} does not match canvas {w}x{h}"
        )

    segments = []
    for stroke in sketches.strokes:
        if len(stroke.points) != STROKE_POINT_COUNT:
            stroke = prepare_motion_stroke(stroke)
        pts = stroke.points
        for i in range(len(pts) - 1):
            a, b = pts[i], pts[i + 1]
            length = float(np.linalg.norm(b - a))
            if length <= 1e-12:
                continue
            segments.append((a, b, (b - a) / length * stroke.speed_scale))
    if not segments:
        raise ValueError("sketch set contains no usable segments")

    field = np.zeros((h, w, 2), dtype=np.float64)
    ys, xs = np.nonzero(mask.data)
    if len(ys) == 0:
        return MotionField(field.astype(np.float32))
    px = xs.astype(np.float64)
    py = ys.astype(np.float64)

    num = np.zeros((len(ys), 2))
    den = np.zeros(len(ys))
    best_d2 = np.full(len(ys), np.inf)
    best_v = np.zeros((len(ys), 2))
    inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma)
    for a, b, vel in segments:
        dx, dy = b[0] - a[0], b[1] - a[1]
        seg_sq = dx * dx + dy * dy
        t = np.clip(((px - a[0]) * dx + (py - a[1]) * dy) / seg_sq, 0.0, 1.0)
        d2 = (px - (a[0] + t * dx)) ** 2 + (py - (a[1] + t * dy)) ** 2
        wgt = np.exp(-d2 * inv_two_sigma_sq)
        den += wgt
        num += wgt[:, None] * vel
        closer = d2 < best_d2
        best_d2[closer] = d2[closer]
        best_v[closer] = vel

    blended = np.where(
        (den >= FALLBACK_WEIGHT)[:, None], num / np.maximum(den, FALLBACK_WEIGHT)[:, None], best_v
    )
    field[ys, xs] = blended
    return MotionField(field.astype(np.float32))
