"""Image and field similarity metrics: MSE, PSNR, AEPE, MS-SSIM.

Images are compared after normalizing 8-bit samples to [0, 1]; the PSNR
data range is therefore fixed at 1.0. Field metrics work on raw
(u, v) components in pixels/frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .fields import FluidMask, MotionField, RasterImage

MS_SSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
MS_SSIM_WINDOW = 11
MS_SSIM_SIGMA = 1.5
MS_SSIM_K1 = 0.01
MS_SSIM_K2 = 0.03


@dataclass(frozen=True)
class MetricReport:
    name: str
    value: float
    units: str  # "dB" or "dimensionless"
    masked: bool = False

    def __post_init__(self):
        if math.isnan(self.value):
            raise ValueError(f"metric {self.name} produced NaN")


def _paired_components(a, b):
    if isinstance(a, RasterImage) and isinstance(b, RasterImage):
        if a.data.shape != b.data.shape:
            raise ValueError(f"image shapes differ: {a.data.shape} vs {b.data.shape}")
        return a.to_float(), b.to_float()
    if isinstance(a, MotionField) and isinstance(b, MotionField):
        if a.data.shape != b.data.shape:
            raise ValueError(f"field shapes differ: {a.data.shape} vs {b.data.shape}")
        return a.data.astype(np.float64), b.data.astype(np.float64)
    raise ValueError(
        f"mse needs two images or two fields, got {type(a).__name__} and {type(b).__name__}"
    )


def mse(a, b) -> float:
    """Mean squared difference over all components (float domain)."""
    fa, fb = _paired_components(a, b)
    diff = fa - fb
    return float(np.mean(diff * diff))


def psnr(a: RasterImage, b: RasterImage) -> float:
    """Peak signal-to-noise ratio in dB over the normalized [0, 1] range.

    Identical inputs give +infinity.
    """
    if not (isinstance(a, RasterImage) and isinstance(b, RasterImage)):
        raise ValueError("psnr compares two images")
    err = mse(a, b)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / err)


def aepe(f: MotionField, g: MotionField, mask: FluidMask | None = None) -> float:
    """Average end-point error: mean Euclidean distance between vectors."""
    if not (isinstance(f, MotionField) and isinstance(g, MotionField)):
        raise ValueError("aepe compares two motion fields")
    if f.data.shape != g.data.shape:
        raise ValueError(f"field shapes differ: {f.data.shape} vs {g.data.shape}")
    dist = np.linalg.norm(f.data.astype(np.float64) - g.data.astype(np.float64), axis=2)
    if mask is None:
        return float(dist.mean())
    if (mask.height, mask.width) != (f.height, f.width):
        raise ValueError("mask dimensions do not match the fields")
    if not mask.data.any():
        raise ValueError("mask selects no pixels")
    return float(dist[mask.data].mean())


# --------------------------------------------------------------------------
# MS-SSIM
# --------------------------------------------------------------------------

def _gaussian_taps(n: int, sigma: float) -> np.ndarray:
    x = np.arange(n, dtype=np.float64) - (n - 1) / 2.0
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


_TAPS = _gaussian_taps(MS_SSIM_WINDOW, MS_SSIM_SIGMA)


def _filter_valid(img: np.ndarray) -> np.ndarray:
    # separable Gaussian, then crop to the fully supported interior
    half = MS_SSIM_WINDOW // 2
    out = correlate1d(img, _TAPS, axis=0, mode="constant")
    out = correlate1d(out, _TAPS, axis=1, mode="constant")
    return out[half:-half, half:-half]


def _downsample2(img: np.ndarray) -> np.ndarray:
    h, w = img.shape
    h2, w2 = h - (h % 2), w - (w % 2)
    cropped = img[:h2, :w2]
    return cropped.reshape(h2 // 2, 2, w2 // 2, 2).mean(axis=(1, 3))


def _signed_pow(base: float, exp: float) -> float:
    return math.copysign(abs(base) ** exp, base)


def ms_ssim(a: RasterImage, b: RasterImage) -> float:
    """Multi-scale structural similarity, averaged over channels.

    Standard 5-scale form: 11x11 Gaussian window (sigma 1.5), K1=0.01,
    K2=0.03, scale weights (0.0448, 0.2856, 0.3001, 0.2363, 0.1333),
    dyadic 2x2-mean downsampling, contrast/structure terms at every scale
    and the luminance term only at the coarsest. Images smaller than 176
    px on a side use fewer scales with renormalized weights; smaller than
    one window is an error.
    """
    if not (isinstance(a, RasterImage) and isinstance(b, RasterImage)):
        raise ValueError("ms_ssim compares two images")
    if a.data.shape != b.data.shape:
        raise ValueError(f"image shapes differ: {a.data.shape} vs {b.data.shape}")
    side = min(a.width, a.height)
    if side < MS_SSIM_WINDOW:
        raise ValueError(
            f"images must be at least {MS_SSIM_WINDOW}px on a side, got {side}"
        )
    levels = 1
    while levels < len(MS_SSIM_WEIGHTS) and (side // 2) >= MS_SSIM_WINDOW:
        side //= 2
        levels += 1
    weights = np.array(MS_SSIM_WEIGHTS[:levels])
    if levels < len(MS_SSIM_WEIGHTS):
        # reduced-scale form: renormalize; the full form uses the published
        # weights as-is (they sum to 1.0001 by construction)
        weights = weights / weights.sum()

    c1 = MS_SSIM_K1 * MS_SSIM_K1
    c2 = MS_SSIM_K2 * MS_SSIM_K2
    fa, fb = a.to_float(), b.to_float()
    channel_scores = []
    for ch in range(a.channels):
        x, y = fa[:, :, ch], fb[:, :, ch]
        score = 1.0
        for level in range(levels):
            mu_x = _filter_valid(x)
            mu_y = _filter_valid(y)
            var_x = _filter_valid(x * x) - mu_x * mu_x
            var_y = _filter_valid(y * y) - mu_y * mu_y
            cov = _filter_valid(x * y) - mu_x * mu_y
            cs = float(np.mean((2.0 * cov + c2) / (var_x + var_y + c2)))
            if level < levels - 1:
                score *= _signed_pow(cs, weights[level])
                x, y = _downsample2(x), _downsample2(y)
            else:
                lum_cs = (2.0 * mu_x * mu_y + c1) / (mu_x * mu_x + mu_y * mu_y + c1) * (
                    (2.0 * cov + c2) / (var_x + var_y + c2)
                )
                score *= _signed_pow(float(np.mean(lum_cs)), weights[level])
        channel_scores.append(score)
    return float(np.mean(channel_scores))
