"""Pixel-level primitives.

Images are plain numpy arrays:

* RGB raster: ``(height, width, 3)`` uint8
* gray image: ``(height, width)`` uint8
* binary mask: ``(height, width)`` bool, ``True`` is a white pixel

All functions are pure; inputs are never modified.
"""

from __future__ import annotations

import math
import os
from typing import NamedTuple

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from .errors import CorruptImage, InvalidParameter, UnsupportedFormat

_LUMA = np.array([0.299, 0.587, 0.114])

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
SOBEL_Y = SOBEL_X.T.copy()

# (row, col) offsets of the four 3-pixel line structuring elements
LINE_SE = {
    0: ((0, -1), (0, 0), (0, 1)),
    45: ((-1, 1), (0, 0), (1, -1)),
    90: ((-1, 0), (0, 0), (1, 0)),
    135: ((-1, -1), (0, 0), (1, 1)),
}


class Point(NamedTuple):
    x: float
    y: float


def decode_image(path: str | os.PathLike) -> np.ndarray:
    """Decode a raster file into an ``(h, w, 3)`` uint8 RGB array.

    Grayscale sources are replicated across the three channels.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in ("I;16", "I;16B", "I;16L", "I"):
                arr = np.asarray(im, dtype=np.float64)
                peak = 65535.0 if im.mode.startswith("I;16") else max(float(arr.max()), 1.0)
                gray = np.clip(np.rint(arr * (255.0 / peak)), 0, 255).astype(np.uint8)
                return np.repeat(gray[:, :, None], 3, axis=2)
            rgb = im.convert("RGB")
    except UnidentifiedImageError as exc:
        raise UnsupportedFormat(f"{path}: not a recognised raster image") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptImage(f"{path}: {exc}") from exc
    return np.array(rgb, dtype=np.uint8)


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """BT.601 luma, rounded and clamped to uint8."""
    if img.ndim == 2:
        return img.astype(np.uint8, copy=True)
    y = img[..., :3].astype(np.float64) @ _LUMA
    return np.clip(np.rint(y), 0, 255).astype(np.uint8)


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian with radius ``ceil(3 * sigma)``."""
    if not sigma > 0:
        raise InvalidParameter(f"sigma must be > 0, got {sigma}")
    radius = int(math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def _smooth(values: np.ndarray, sigma: float) -> np.ndarray:
    k = gaussian_kernel(sigma)
    out = ndimage.correlate1d(values.astype(np.float64), k, axis=0, mode="nearest")
    return ndimage.correlate1d(out, k, axis=1, mode="nearest")


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with edge-clamp borders, re-quantized to uint8."""
    return np.clip(np.rint(_smooth(img, sigma)), 0, 255).astype(np.uint8)


def _sobel(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    v = values.astype(np.float64)
    gx = ndimage.correlate(v, SOBEL_X, mode="nearest")
    gy = ndimage.correlate(v, SOBEL_Y, mode="nearest")
    return gx, gy


def sobel_edges(img: np.ndarray, tau_s: float) -> np.ndarray:
    """Threshold the Sobel magnitude relative to its per-image maximum."""
    if not 0.0 < tau_s < 1.0:
        raise InvalidParameter(f"tau_s must lie in (0, 1), got {tau_s}")
    gx, gy = _sobel(img)
    mag = np.hypot(gx, gy)
    peak = mag.max()
    if peak == 0:
        return np.zeros(img.shape[:2], dtype=bool)
    return mag / peak >= tau_s


def _shift(a: np.ndarray, dr: int, dc: int, fill) -> np.ndarray:
    """``out[r, c] = a[r + dr, c + dc]``, ``fill`` where that falls outside."""
    h, w = a.shape
    out = np.full_like(a, fill)
    r0, r1 = max(0, -dr), min(h, h - dr)
    c0, c1 = max(0, -dc), min(w, w - dc)
    if r0 < r1 and c0 < c1:
        out[r0:r1, c0:c1] = a[r0 + dr:r1 + dr, c0 + dc:c1 + dc]
    return out


def dilate_line_se(mask: np.ndarray) -> np.ndarray:
    """Union of dilations by the 0, 45, 90 and 135 degree 3-pixel lines."""
    mask = np.asarray(mask, dtype=bool)
    out = mask.copy()
    for offsets in LINE_SE.values():
        for dr, dc in offsets:
            # the line elements are symmetric, so dilation equals an OR of shifts
            out |= _shift(mask, dr, dc, False)
    return out


def fill_holes(mask: np.ndarray) -> np.ndarray:
    """Set every off-pixel that the border cannot reach through 4-connected background."""
    mask = np.asarray(mask, dtype=bool)
    return ndimage.binary_fill_holes(mask, structure=ndimage.generate_binary_structure(2, 1))


def centroid(mask: np.ndarray) -> Point | None:
    rows, cols = np.nonzero(mask)
    if rows.size == 0:
        return None
    return Point(float(cols.mean()), float(rows.mean()))


# neighbour offset (dr, dc) along the gradient for each quantized direction
_NMS_OFFSETS = ((0, 1), (1, 1), (1, 0), (1, -1))


def canny_edges(
    img: np.ndarray,
    sigma: float = 2.0,
    low_ratio: float = 0.4,
    high_pct: float = 80.0,
) -> np.ndarray:
    """Classic Canny detector.

    The high threshold is the ``high_pct`` percentile of the nonzero gradient
    magnitudes; the low threshold is ``low_ratio`` times the high one.
    Non-maximum suppression keeps a pixel when it is strictly above its
    backward neighbour and not below its forward one, so plateaus of two
    equal maxima thin to a single pixel.
    """
    if not 0.0 < low_ratio < 1.0:
        raise InvalidParameter(f"low_ratio must lie in (0, 1), got {low_ratio}")
    if not 0.0 < high_pct < 100.0:
        raise InvalidParameter(f"high_pct must lie in (0, 100), got {high_pct}")

    smoothed = _smooth(img, sigma)
    gx, gy = _sobel(smoothed)
    mag = np.hypot(gx, gy)
    # ulp-level residue of smoothing flat areas is not a gradient
    mag[mag < 1e-6] = 0.0
    nonzero = mag[mag > 0]
    if nonzero.size == 0:
        return np.zeros(img.shape, dtype=bool)

    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    sector = (((angle + 22.5) // 45.0).astype(np.int64)) % 4

    keep = np.zeros(mag.shape, dtype=bool)
    for s, (dr, dc) in enumerate(_NMS_OFFSETS):
        fwd = _shift(mag, dr, dc, 0.0)
        back = _shift(mag, -dr, -dc, 0.0)
        keep |= (sector == s) & (mag > back) & (mag >= fwd)
    nms = np.where(keep, mag, 0.0)

    high = float(np.percentile(nonzero, high_pct))
    low = low_ratio * high
    weak = nms >= low
    weak &= nms > 0
    strong = weak & (nms >= high)
    labels, count = ndimage.label(weak, structure=np.ones((3, 3), dtype=bool))
    if count == 0:
        return weak
    accepted = np.zeros(count + 1, dtype=bool)
    accepted[np.unique(labels[strong])] = True
    accepted[0] = False
    return accepted[labels]
