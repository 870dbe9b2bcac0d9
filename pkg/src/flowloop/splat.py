"""Forward softmax splatting and symmetric frame composition.

Each frame of the loop is built by splatting the source image forward
along the n-step displacement and backward along the (n - N)-step
displacement, then blending the two with weights alpha = 1 - n/N and
alpha_hat = n/N. Colliding source pixels are averaged with softmax
weights e^Z, so an importance map can decide who wins a collision.
Holes left by both splats fall back to the static source pixel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import DisplacementField, FluidMask, MotionField, RasterImage
from .integrate import DisplacementSequence, integrate_displacements

WEIGHT_EPSILON = 1e-8


@dataclass(frozen=True)
class ImportanceMap:
    """Per-pixel softmax exponent Z; larger wins collisions.

    Values are max-shifted before exponentiation, so only differences
    matter; keeping |Z| within about 10 avoids meaningless extremes.
    """

    data: np.ndarray  # (H, W) float

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"importance map must be 2D, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("importance map contains non-finite values")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @classmethod
    def uniform(cls, width: int, height: int) -> "ImportanceMap":
        return cls(np.zeros((height, width)))

    @classmethod
    def from_field_magnitude(cls, fld: MotionField, gamma: float = 0.5) -> "ImportanceMap":
        """Z = -gamma * |F|: slower pixels win collisions, which keeps
        slow-moving detail from being run over by fast streaks."""
        return cls(-float(gamma) * fld.magnitude())


@dataclass(frozen=True)
class FrameSequence:
    """One loop period: frames n = 0 .. N-1 (frame N equals frame 0)."""

    frames: tuple[RasterImage, ...]
    loop_length: int

    def __post_init__(self):
        if self.loop_length < 2:
            raise ValueError("loop_length must be >= 2")
        if len(self.frames) != self.loop_length:
            raise ValueError(
                f"expected {self.loop_length} frames, got {len(self.frames)}"
            )
        first = self.frames[0]
        for fr in self.frames:
            if fr.data.shape != first.data.shape:
                raise ValueError("all frames must share dimensions and channels")


def _check_dims(name_a, a, name_b, b):
    if (a.height, a.width) != (b.height, b.width):
        raise ValueError(
            f"{name_a} {a.width}x{a.height} and {name_b} {b.width}x{b.height} differ"
        )


def splat_forward(
    source: RasterImage,
    disp: DisplacementField,
    z: ImportanceMap,
    mask: FluidMask,
) -> tuple[np.ndarray, np.ndarray]:
    """Scatter masked source pixels to their displaced positions.

    Every masked pixel contributes value * e^(Z - Zmax) to the four integer
    neighbors of its target with bilinear partition weights. Returns the
    unnormalized (accum, weight) sums as float64 arrays; contributions
    landing outside the image are dropped. Accumulation order is fixed, so
    results are bit-reproducible run to run.
    """
    _check_dims("source", source, "displacement", disp)
    _check_dims("source", source, "importance", z)
    _check_dims("source", source, "mask", mask)
    h, w, c = source.data.shape
    accum = np.zeros((h, w, c))
    weight = np.zeros((h, w))
    ys, xs = np.nonzero(mask.data)
    if len(ys) == 0:
        return accum, weight

    values = source.to_float()[ys, xs]  # (M, C)
    zsel = z.data[ys, xs]
    wsrc = np.exp(zsel - z.data.max())
    tx = xs + disp.data[ys, xs, 0].astype(np.float64)
    ty = ys + disp.data[ys, xs, 1].astype(np.float64)
    x0 = np.floor(tx).astype(np.intp)
    y0 = np.floor(ty).astype(np.intp)
    fx = tx - x0
    fy = ty - y0

    corner_idx = []
    corner_wgt = []
    corner_val = []
    for cx, cy, cw in (
        (x0, y0, (1 - fx) * (1 - fy)),
        (x0 + 1, y0, fx * (1 - fy)),
        (x0, y0 + 1, (1 - fx) * fy),
        (x0 + 1, y0 + 1, fx * fy),
    ):
        valid = (cx >= 0) & (cx < w) & (cy >= 0) & (cy < h)
        corner_idx.append(cy[valid] * w + cx[valid])
        corner_wgt.append((wsrc * cw)[valid])
        corner_val.append(values[valid])
    idx = np.concatenate(corner_idx)
    wgt = np.concatenate(corner_wgt)
    vals = np.concatenate(corner_val)

    weight = np.bincount(idx, weights=wgt, minlength=h * w).reshape(h, w)
    for ch in range(c):
        accum[:, :, ch] = np.bincount(
            idx, weights=wgt * vals[:, ch], minlength=h * w
        ).reshape(h, w)
    return accum, weight


def compose_frame(
    image: RasterImage,
    seq: DisplacementSequence,
    z: ImportanceMap,
    mask: FluidMask,
    n: int,
) -> RasterImage:
    """Blend the forward and backward splats of frame n into one image.

    Destination pixels whose combined softmax weight stays below 1e-8, and
    every unmasked pixel, keep the static source value; everything else is
    the softmax-normalized blend, clamped to the valid sample range. Frames
    0 and N reproduce the source image exactly.
    """
    big_n = seq.loop_length
    if not 0 <= n <= big_n:
        raise ValueError(f"frame index {n} outside [0, {big_n}]")
    _check_dims("image", image, "displacements", seq.forward[0])
    alpha = 1.0 - n / big_n
    alpha_hat = n / big_n

    acc_f, w_f = splat_forward(image, seq.forward[n], z, mask)
    acc_b, w_b = splat_forward(image, seq.backward[n], z, mask)
    num = alpha * acc_f + alpha_hat * acc_b
    den = alpha * w_f + alpha_hat * w_b

    out = image.to_float().copy()
    lit = mask.data & (den >= WEIGHT_EPSILON)
    out[lit] = num[lit] / den[lit, None]
    np.clip(out, 0.0, 1.0, out=out)

    if image.data.dtype == np.uint8:
        return RasterImage(np.rint(out * 255.0).astype(np.uint8))
    return RasterImage(out.astype(image.data.dtype))


def importance_for(fld: MotionField, policy: str) -> ImportanceMap:
    """Build an importance map from a policy string: "uniform" or "mag[:gamma]"."""
    if policy == "uniform":
        return ImportanceMap.uniform(fld.width, fld.height)
    if policy == "mag" or policy.startswith("mag:"):
        gamma = 0.5
        if ":" in policy:
            try:
                gamma = float(policy.split(":", 1)[1])
            except ValueError:
                raise ValueError(f"bad magnitude gamma in z policy {policy!r}") from None
        return ImportanceMap.from_field_magnitude(fld, gamma)
    raise ValueError(f"unknown z policy {policy!r}; expected 'uniform' or 'mag[:gamma]'")


def render_loop(
    image: RasterImage,
    fld: MotionField,
    mask: FluidMask,
    loop_length: int,
    z_policy: str = "uniform",
) -> FrameSequence:
    """Render one full loop: frames n = 0 .. N-1.

    Composing at n = N reproduces frame 0, so playing the returned frames
    cyclically loops seamlessly without a duplicated endpoint.
    """
    if loop_length < 2:
        raise ValueError(f"loop_length must be >= 2, got {loop_length}")
    _check_dims("image", image, "field", fld)
    _check_dims("image", image, "mask", mask)
    seq = integrate_displacements(fld, loop_length, mask)
    z = importance_for(fld, z_policy)
    frames = tuple(
        compose_frame(image, seq, z, mask, n) for n in range(loop_length)
    )
    return FrameSequence(frames, loop_length)
