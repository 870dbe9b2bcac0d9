"""Core raster types: motion/displacement fields, fluid masks, images.

Coordinate convention used across the package: x grows to the right
(columns), y grows downward (rows), and grid sample (x, y) lives at
``data[y, x]``. Motion fields store per-pixel velocities in pixels/frame.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from PIL import Image

FLO_MAGIC = 202021.25
UNKNOWN_FLOW_THRESHOLD = 1e9


class FlowFileError(ValueError):
    """A .flo byte stream could not be decoded."""


class BadMagicError(FlowFileError):
    """The 4-byte magic tag does not decode to the expected float."""


class TruncatedFileError(FlowFileError):
    """The payload is shorter than the header promises."""


def _as_grid(data, channels, dtype):
    arr = np.array(data, dtype=dtype, copy=True)
    if arr.ndim != 3 or arr.shape[2] != channels:
        raise ValueError(f"expected (H, W, {channels}) grid, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("grid must be at least 1x1")
    return arr


@dataclass(frozen=True)
class MotionField:
    """Dense per-pixel 2D velocity grid, (u, v) in pixels/frame, float32."""

    data: np.ndarray  # (H, W, 2)

    def __post_init__(self):
        arr = _as_grid(self.data, 2, np.float32)
        if not np.isfinite(arr).all():
            raise ValueError("motion field contains non-finite components")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def magnitude(self) -> np.ndarray:
        return np.linalg.norm(self.data.astype(np.float64), axis=2)


@dataclass(frozen=True)
class DisplacementField:
    """Accumulated per-pixel displacement (dx, dy) in pixels after
    ``step_index`` integration steps (negative for backward-in-time)."""

    data: np.ndarray  # (H, W, 2)
    step_index: int = 0

    def __post_init__(self):
        arr = _as_grid(self.data, 2, np.float32)
        if not np.isfinite(arr).all():
            raise ValueError("displacement field contains non-finite components")
        if self.step_index == 0 and np.any(arr != 0.0):
            raise ValueError("step_index 0 requires an all-zero displacement field")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @classmethod
    def zero(cls, width: int, height: int) -> "DisplacementField":
        return cls(np.zeros((height, width, 2), dtype=np.float32), step_index=0)


@dataclass(frozen=True)
class FluidMask:
    """Boolean per-pixel fluid-region indicator (True = fluid, may move)."""

    data: np.ndarray  # (H, W) bool

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2D, got shape {arr.shape}")
        arr = arr.astype(bool)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @classmethod
    def full(cls, width: int, height: int) -> "FluidMask":
        return cls(np.ones((height, width), dtype=bool))


@dataclass(frozen=True)
class RasterImage:
    """Row-major C-channel raster, uint8 in [0, 255] or float in [0, 1].

    Channel-generic on purpose: 3 channels for RGB frames, 1 for greyscale
    sketches, anything >= 1 for externally produced feature grids that go
    through the same splatting path.
    """

    data: np.ndarray  # (H, W, C)

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] < 1:
            raise ValueError(f"expected (H, W, C>=1) raster, got shape {arr.shape}")
        if arr.dtype == np.uint8:
            pass
        elif np.issubdtype(arr.dtype, np.floating):
            if not np.isfinite(arr).all():
                raise ValueError("image contains non-finite samples")
            if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
                raise ValueError("float image samples must lie in [0, 1]")
        else:
            raise ValueError(f"unsupported image dtype {arr.dtype}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def to_float(self) -> np.ndarray:
        """Samples as float64 in [0, 1] regardless of storage dtype."""
        if self.data.dtype == np.uint8:
            return self.data.astype(np.float64) / 255.0
        return self.data.astype(np.float64)


# --------------------------------------------------------------------------
# Middlebury .flo interchange
#
# Layout: float32 magic 202021.25, int32 width, int32 height, then
# width*height interleaved (u, v) float32 pairs, row-major, top row first.
# All little-endian.
# --------------------------------------------------------------------------

def load_flo(raw: bytes, *, zero_unknown: bool = False) -> MotionField:
    """Decode a Middlebury .flo byte string into a MotionField.

    Components with magnitude above ``UNKNOWN_FLOW_THRESHOLD`` mark unknown
    flow in some producers; they are rejected unless ``zero_unknown`` is set,
    in which case both components of the affected vectors become 0.
    """
    if len(raw) < 12:
        raise TruncatedFileError(f"header needs 12 bytes, got {len(raw)}")
    (magic,) = struct.unpack_from("<f", raw, 0)
    if magic != np.float32(FLO_MAGIC):
        raise BadMagicError(f"bad magic {magic!r}, expected {FLO_MAGIC}")
    width, height = struct.unpack_from("<ii", raw, 4)
    if width < 1 or height < 1:
        raise FlowFileError(f"invalid dimensions {width}x{height}")
    expected = 12 + width * height * 8
    if len(raw) < expected:
        raise TruncatedFileError(
            f"payload truncated: need {expected} bytes for {width}x{height}, got {len(raw)}"
        )
    flat = np.frombuffer(raw, dtype="<f4", count=width * height * 2, offset=12)
    grid = flat.reshape(height, width, 2).astype(np.float32)
    unknown = np.abs(grid) > UNKNOWN_FLOW_THRESHOLD
    if unknown.any():
        if not zero_unknown:
            raise ValueError("field contains unknown-flow sentinel values")
        grid = grid.copy()
        grid[np.any(unknown, axis=2)] = 0.0
    if not np.isfinite(grid).all():
        if not zero_unknown:
            raise ValueError("field contains non-finite values")
        grid = np.where(np.isfinite(grid), grid, np.float32(0.0))
    return MotionField(grid)


def save_flo(fld: MotionField) -> bytes:
    """Encode a MotionField as .flo bytes; load_flo round-trips bit-exactly."""
    header = struct.pack("<fii", FLO_MAGIC, fld.width, fld.height)
    return header + fld.data.astype("<f4").tobytes()


def read_flo(path, **kwargs) -> MotionField:
    with open(path, "rb") as fh:
        return load_flo(fh.read(), **kwargs)


def write_flo(path, fld: MotionField) -> None:
    with open(path, "wb") as fh:
        fh.write(save_flo(fld))


# --------------------------------------------------------------------------
# Bilinear sampling with clamp-to-edge
# --------------------------------------------------------------------------

def bilinear_at(grid: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Sample an (H, W, C) grid at float positions, clamping to the border.

    Vectorized core shared by point sampling, integration and tracing.
    Arithmetic runs in the dtype promoted from the inputs.
    """
    h, w = grid.shape[:2]
    xs = np.clip(np.asarray(xs), 0.0, w - 1.0)
    ys = np.clip(np.asarray(ys), 0.0, h - 1.0)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (xs - x0)[..., None]
    fy = (ys - y0)[..., None]
    top = grid[y0, x0] * (1.0 - fx) + grid[y0, x1] * fx
    bot = grid[y1, x0] * (1.0 - fx) + grid[y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def sample_bilinear(fld: MotionField, position) -> tuple[float, float]:
    """Bilinearly interpolated (u, v) at a float (x, y) position.

    Positions outside [0, width-1] x [0, height-1] clamp to the border, so
    trajectories never read garbage and never stall artificially at image
    edges.
    """
    x, y = float(position[0]), float(position[1])
    if not (np.isfinite(x) and np.isfinite(y)):
        raise ValueError(f"non-finite sample position ({x}, {y})")
    uv = bilinear_at(fld.data.astype(np.float64), np.float64(x), np.float64(y))
    return float(uv[0]), float(uv[1])


# --------------------------------------------------------------------------
# Color-wheel flow rendering (Baker et al. coding)
# --------------------------------------------------------------------------

_WHEEL_SEGMENTS = (15, 6, 4, 11, 13, 6)  # RY, YG, GC, CB, BM, MR


def _color_wheel() -> np.ndarray:
    ry, yg, gc, cb, bm, mr = _WHEEL_SEGMENTS
    wheel = np.zeros((sum(_WHEEL_SEGMENTS), 3))
    i = 0
    wheel[i:i + ry, 0] = 1.0
    wheel[i:i + ry, 1] = np.arange(ry) / ry
    i += ry
    wheel[i:i + yg, 0] = 1.0 - np.arange(yg) / yg
    wheel[i:i + yg, 1] = 1.0
    i += yg
    wheel[i:i + gc, 1] = 1.0
    wheel[i:i + gc, 2] = np.arange(gc) / gc
    i += gc
    wheel[i:i + cb, 1] = 1.0 - np.arange(cb) / cb
    wheel[i:i + cb, 2] = 1.0
    i += cb
    wheel[i:i + bm, 0] = np.arange(bm) / bm
    wheel[i:i + bm, 2] = 1.0
    i += bm
    wheel[i:i + mr, 0] = 1.0
    wheel[i:i + mr, 2] = 1.0 - np.arange(mr) / mr
    return wheel


_WHEEL = _color_wheel()


def visualize_flow(fld: MotionField, max_radius="auto") -> RasterImage:
    """Render a motion field with the 55-entry Middlebury color wheel.

    Hue encodes direction (angle of atan2(-v, -u) across the wheel),
    saturation encodes speed relative to ``max_radius`` (clipped to 1).
    Zero flow renders white. ``max_radius="auto"`` normalizes by the
    field's own maximum magnitude (floored at 1e-6 so a zero field stays
    well-defined).
    """
    u = fld.data[:, :, 0].astype(np.float64)
    v = fld.data[:, :, 1].astype(np.float64)
    mag = np.sqrt(u * u + v * v)
    if max_radius == "auto":
        rad = max(float(mag.max()), 1e-6)
    else:
        rad = float(max_radius)
        if not np.isfinite(rad) or rad <= 0.0:
            raise ValueError(f"max_radius must be positive, got {max_radius!r}")

    ncols = _WHEEL.shape[0]
    angle = np.arctan2(-v, -u) / np.pi  # in [-1, 1]
    fk = (angle + 1.0) / 2.0 * (ncols - 1)
    k0 = np.floor(fk).astype(np.intp)
    k1 = (k0 + 1) % ncols
    f = (fk - k0)[..., None]
    color = _WHEEL[k0] * (1.0 - f) + _WHEEL[k1] * f

    sat = np.clip(mag / rad, 0.0, 1.0)[..., None]
    rgb = 1.0 - sat * (1.0 - color)
    return RasterImage(np.floor(255.0 * rgb).astype(np.uint8))


# --------------------------------------------------------------------------
# PNG plumbing (8-bit RGB images, 8-bit grayscale masks, threshold > 127)
# --------------------------------------------------------------------------

def image_from_png(source) -> RasterImage:
    """Read a PNG (path or file-like) as an 8-bit RGB RasterImage."""
    with Image.open(source) as img:
        rgb = img.convert("RGB")
        return RasterImage(np.asarray(rgb, dtype=np.uint8))


def image_to_png(img: RasterImage, target) -> None:
    data = img.data
    if data.dtype != np.uint8:
        data = np.rint(np.clip(data, 0.0, 1.0) * 255.0).astype(np.uint8)
    if data.shape[2] == 1:
        pil = Image.fromarray(data[:, :, 0], mode="L")
    elif data.shape[2] == 3:
        pil = Image.fromarray(data, mode="RGB")
    else:
        raise ValueError(f"cannot encode {data.shape[2]}-channel raster as PNG")
    pil.save(target, format="PNG")


def mask_from_png(source) -> FluidMask:
    """Read a PNG as a fluid mask: grayscale level > 127 marks fluid."""
    with Image.open(source) as img:
        gray = img.convert("L")
        return FluidMask(np.asarray(gray, dtype=np.uint8) > 127)


def mask_to_png(mask: FluidMask, target) -> None:
    pil = Image.fromarray(np.where(mask.data, 255, 0).astype(np.uint8), mode="L")
    pil.save(target, format="PNG")
