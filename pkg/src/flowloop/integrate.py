"""Euler integration of a motion field into bidirectional displacement fields.

A motion field gives each pixel its one-frame velocity. Chaining it n times
yields the displacement that moves frame-0 pixels to their frame-n position:

    d_n(p) = d_{n-1}(p) + F(p + d_{n-1}(p))

evaluated with bilinear sampling. The backward sequence runs the same
recurrence on the negated field, giving the displacement to frame n-N, so a
frame can be synthesized from both ends of the loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import DisplacementField, FluidMask, MotionField, bilinear_at, sample_bilinear


@dataclass(frozen=True)
class DisplacementSequence:
    """Forward and backward displacement fields for one loop of length N.

    ``forward[n]`` moves frame-0 pixels n steps ahead; ``backward[n]`` moves
    them n - N steps, i.e. backward[0] is the full reverse displacement and
    backward[N] is zero. Both lists have N + 1 entries.
    """

    forward: tuple[DisplacementField, ...]
    backward: tuple[DisplacementField, ...]
    loop_length: int

    def __post_init__(self):
        n = self.loop_length
        if n < 1:
            raise ValueError("loop_length must be >= 1")
        if len(self.forward) != n + 1 or len(self.backward) != n + 1:
            raise ValueError("forward/backward must each hold loop_length + 1 fields")
        if np.any(self.forward[0].data != 0.0) or np.any(self.backward[n].data != 0.0):
            raise ValueError("zero-step displacements must be exactly zero")

    @property
    def width(self) -> int:
        return self.forward[0].width

    @property
    def height(self) -> int:
        return self.forward[0].height


def advect_point(fld: MotionField, p) -> tuple[float, float]:
    """One forward Euler step: the new position of a particle at p."""
    u, v = sample_bilinear(fld, p)
    return float(p[0]) + u, float(p[1]) + v


def _accumulate(velocity: np.ndarray, steps: int) -> list[np.ndarray]:
    """Run the displacement recurrence for every pixel at once.

    Accumulates in float64 and returns per-step float32 snapshots; see the
    note on precision in integrate_displacements.
    """
    h, w = velocity.shape[:2]
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    disp = np.zeros((h, w, 2), dtype=np.float64)
    out = []
    for _ in range(steps):
        uv = bilinear_at(velocity, xs + disp[:, :, 0], ys + disp[:, :, 1])
        disp = disp + uv
        out.append(disp.astype(np.float32))
    return out


def integrate_displacements(fld: MotionField, loop_length: int, mask: FluidMask) -> DisplacementSequence:
    """Integrate a motion field into forward/backward displacement sequences.

    The field is zeroed outside the mask before integration, so trajectories
    that wander out of the fluid region stop accumulating; masked-out pixels
    themselves carry exactly zero displacement at every step. Out-of-image
    positions clamp to the border during sampling (the displacement saturates
    instead of diverging).

    Accumulation runs in float64 with float32 per-step snapshots: the stored
    fields are float32 either way, and chaining the recurrence in float32
    lets rounding feed back through the field gradient, which can exceed the
    drift the float32 snapshots themselves introduce.
    """
    if loop_length < 1:
        raise ValueError(f"loop_length must be >= 1, got {loop_length}")
    if (fld.height, fld.width) != (mask.height, mask.width):
        raise ValueError(
            f"field {fld.width}x{fld.height} and mask {mask.width}x{mask.height} differ"
        )

    velocity = fld.data.astype(np.float64)
    velocity = np.where(mask.data[:, :, None], velocity, 0.0)
    still = ~mask.data

    def snapshots(vel, sign):
        fields = [DisplacementField.zero(fld.width, fld.height)]
        for k, snap in enumerate(_accumulate(vel, loop_length), start=1):
            snap[still] = 0.0
            fields.append(DisplacementField(snap, step_index=sign * k))
        return fields

    forward = snapshots(velocity, +1)
    backward_by_steps = snapshots(-velocity, -1)
    # backward[n] holds the (n - N)-step displacement: n = N is zero steps.
    backward = [backward_by_steps[loop_length - n] for n in range(loop_length + 1)]
    return DisplacementSequence(tuple(forward), tuple(backward), loop_length)
