"""Colour, texture and edge-histogram features, and whole-image signatures."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import imaging, regions
from .errors import EmptyRect, ImageTooSmall, InvalidParameter, RectTooSmall
from .regions import Rect, RoiSet, Scheme

FORMAT_VERSION = 1

HUE_BINS, SAT_BINS, VAL_BINS = 18, 3, 3
COLOR_DIM = HUE_BINS + SAT_BINS + VAL_BINS  # 24
TEXTURE_DIM = 17
REGION_DIM = COLOR_DIM + TEXTURE_DIM  # 41
EHD_DIM = 80

# d = 1 displacement (dr, dc) for 0, 45, 90 and 135 degrees
GLCM_OFFSETS = ((0, 1), (-1, 1), (-1, 0), (-1, -1))
EDGE_TYPES = ("vertical", "horizontal", "diag45", "diag135", "nondirectional")


@dataclass(frozen=True)
class ExtractionParams:
    tau_s: float = 0.10
    tau_r: float = 0.30
    levels: int = 16
    t_edge: float = 11.0
    sigma: float = 2.0
    low_ratio: float = 0.4
    high_pct: float = 80.0
    strip_count: int = 3
    border_crop: int = 20
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        if not 0.0 < self.tau_s < 1.0:
            raise InvalidParameter(f"tau_s must lie in (0, 1), got {self.tau_s}")
        if not 0.0 < self.tau_r <= 1.0:
            raise InvalidParameter(f"tau_r must lie in (0, 1], got {self.tau_r}")
        if not 2 <= self.levels <= 256:
            raise InvalidParameter(f"levels must lie in [2, 256], got {self.levels}")
        if self.t_edge < 0:
            raise InvalidParameter(f"t_edge must be >= 0, got {self.t_edge}")
        if self.strip_count < 1:
            raise InvalidParameter(f"strip_count must be >= 1, got {self.strip_count}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExtractionParams":
        return cls(**d)

    def fingerprint(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _check_rect(img: np.ndarray, rect: Rect) -> None:
    if rect.w <= 0 or rect.h <= 0:
        raise EmptyRect(f"empty rect {rect}")
    h, w = img.shape[:2]
    if rect.x0 < 0 or rect.y0 < 0 or rect.x0 + rect.w > w or rect.y0 + rect.h > h:
        raise EmptyRect(f"rect {rect} is not inside a {w}x{h} image")


def hsv_histogram(img: np.ndarray, rect: Rect | None = None) -> np.ndarray:
    """18 hue, 3 saturation and 3 value bins, each channel normalized by pixel count.

    Bin indices are evaluated in exact integer arithmetic, which equals
    ``floor(H / 20)``, ``floor(3 S)`` and ``floor(3 V)`` on the hexcone model.
    Achromatic pixels go to hue bin 0.
    """
    if rect is None:
        rect = Rect(0, 0, img.shape[1], img.shape[0])
    _check_rect(img, rect)
    px = img[rect.slice()].reshape(-1, 3).astype(np.int64)
    r, g, b = px[:, 0], px[:, 1], px[:, 2]
    mx = px.max(axis=1)
    mn = px.min(axis=1)
    delta = mx - mn

    # hue numerator in units of delta/6 of the colour circle
    num = np.where(
        mx == r,
        (g - b) + np.where(g < b, 6 * delta, 0),
        np.where(mx == g, (b - r) + 2 * delta, (r - g) + 4 * delta),
    )
    safe = np.maximum(delta, 1)
    hue = np.where(delta > 0, np.minimum((3 * num) // safe, HUE_BINS - 1), 0)
    sat = np.where(mx > 0, np.minimum((3 * delta) // np.maximum(mx, 1), SAT_BINS - 1), 0)
    val = np.minimum((3 * mx) // 255, VAL_BINS - 1)

    n = float(px.shape[0])
    return np.concatenate([
        np.bincount(hue, minlength=HUE_BINS) / n,
        np.bincount(sat, minlength=SAT_BINS) / n,
        np.bincount(val, minlength=VAL_BINS) / n,
    ])


def quantize(gray: np.ndarray, levels: int) -> np.ndarray:
    return (gray.astype(np.int64) * levels) // 256


def glcm(gray: np.ndarray, rect: Rect, levels: int = 16, offset: tuple[int, int] = (0, 1)) -> np.ndarray:
    """Normalized co-occurrence matrix of ordered pairs ``(q(p), q(p + offset))``.

    Only pairs with both ends inside ``rect`` are counted. With no such pair
    the matrix is all zero.
    """
    _check_rect(gray, rect)
    if levels < 2:
        raise InvalidParameter(f"levels must be >= 2, got {levels}")
    q = quantize(gray[rect.slice()], levels)
    dr, dc = offset
    h, w = q.shape
    r0, r1 = max(0, -dr), h - max(0, dr)
    c0, c1 = max(0, -dc), w - max(0, dc)
    if r0 >= r1 or c0 >= c1:
        return np.zeros((levels, levels))
    src = q[r0:r1, c0:c1]
    dst = q[r0 + dr:r1 + dr, c0 + dc:c1 + dc]
    counts = np.bincount((src * levels + dst).ravel(), minlength=levels * levels)
    return counts.reshape(levels, levels) / counts.sum()


def _haralick(p: np.ndarray) -> tuple[float, float, float, float]:
    levels = p.shape[0]
    i, j = np.indices((levels, levels), dtype=np.float64)
    contrast = float(np.sum((i - j) ** 2 * p))
    energy = float(np.sum(p * p))
    homogeneity = float(np.sum(p / (1.0 + np.abs(i - j))))
    mu_i = float(np.sum(i * p))
    mu_j = float(np.sum(j * p))
    var_i = float(np.sum((i - mu_i) ** 2 * p))
    var_j = float(np.sum((j - mu_j) ** 2 * p))
    # a single occupied row or column: variance is rounding noise, not signal
    if var_i < 1e-12 or var_j < 1e-12:
        corr = 0.0
    else:
        cov = float(np.sum((i - mu_i) * (j - mu_j) * p))
        corr = min(1.0, max(-1.0, cov / math.sqrt(var_i * var_j)))
    return contrast, energy, corr, homogeneity


def glcm_features(gray: np.ndarray, rect: Rect, levels: int = 16) -> np.ndarray:
    """17 texture values scaled to [0, 1].

    Layout: contrast x4, energy x4, correlation x4, homogeneity x4 (each in
    0/45/90/135 degree order), then the entropy of the direction-averaged
    matrix.
    """
    if rect.w < 2 or rect.h < 2:
        raise RectTooSmall(f"texture needs at least a 2x2 rect, got {rect}")
    mats = [glcm(gray, rect, levels, off) for off in GLCM_OFFSETS]
    stats = np.array([_haralick(p) for p in mats])  # (4 directions, 4 features)

    avg = sum(mats) / 4.0
    nz = avg[avg > 0]
    entropy = float(-np.sum(nz * np.log2(nz)))

    out = np.empty(TEXTURE_DIM)
    out[0:4] = stats[:, 0] / float((levels - 1) ** 2)
    out[4:8] = stats[:, 1]
    out[8:12] = (stats[:, 2] + 1.0) / 2.0
    out[12:16] = stats[:, 3]
    out[16] = entropy / math.log2(levels * levels)
    return np.clip(out, 0.0, 1.0)


def _ehd_tile(tile: np.ndarray, t_edge: float) -> np.ndarray:
    sh, sw = tile.shape
    ny, nx = min(8, sh // 2), min(8, sw // 2)
    # even block sides so every block splits into four equal quadrants
    bh, bw = 2 * ((sh // ny) // 2), 2 * ((sw // nx) // 2)
    hh, hw = bh // 2, bw // 2
    q = tile[:ny * bh, :nx * bw].reshape(ny, 2, hh, nx, 2, hw).sum(axis=(2, 5))
    s0, s1 = q[:, 0, :, 0], q[:, 0, :, 1]
    s2, s3 = q[:, 1, :, 0], q[:, 1, :, 1]
    area = float(hh * hw)
    # integer sums keep the responses exactly invariant to negation and shifts
    resp = np.stack([
        np.abs(s0 - s1 + s2 - s3) / area,
        np.abs(s0 + s1 - s2 - s3) / area,
        math.sqrt(2.0) * np.abs(s0 - s3) / area,
        math.sqrt(2.0) * np.abs(s1 - s2) / area,
        2.0 * np.abs(s0 - s1 - s2 + s3) / area,
    ])
    kind = resp.argmax(axis=0)
    counted = resp.max(axis=0) >= t_edge
    return np.bincount(kind[counted], minlength=5) / float(nx * ny)


def ehd(gray: np.ndarray, t_edge: float = 11.0) -> np.ndarray:
    """80-bin edge histogram: 4x4 sub-images times 5 edge types, sub-image-major."""
    h, w = gray.shape[:2]
    if h < 8 or w < 8:
        raise ImageTooSmall(f"edge histogram needs at least 8x8, got {w}x{h}")
    g = gray.astype(np.int64)
    bins = []
    for y0, th in regions._splits(h, 4):
        for x0, tw in regions._splits(w, 4):
            bins.append(_ehd_tile(g[y0:y0 + th, x0:x0 + tw], t_edge))
    return np.concatenate(bins)


def _vec(a) -> np.ndarray:
    return np.array(a, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class RegionDescriptor:
    feature: np.ndarray  # 24 colour bins followed by 17 texture values
    significance: float
    cell_index: int

    def __eq__(self, other):
        if not isinstance(other, RegionDescriptor):
            return NotImplemented
        return (
            self.significance == other.significance
            and self.cell_index == other.cell_index
            and np.array_equal(self.feature, other.feature)
        )


def region_vector(img: np.ndarray, gray: np.ndarray, rect: Rect, levels: int = 16) -> np.ndarray:
    return np.concatenate([hsv_histogram(img, rect), glcm_features(gray, rect, levels)])


def region_descriptor(
    img: np.ndarray,
    gray: np.ndarray,
    rect: Rect,
    significance: float,
    levels: int = 16,
    cell_index: int = 0,
) -> RegionDescriptor:
    return RegionDescriptor(_vec(region_vector(img, gray, rect, levels)), float(significance), cell_index)


@dataclass(frozen=True, eq=False)
class ImageSignature:
    image_id: str
    grid: tuple[RegionDescriptor, ...]
    h: tuple[RegionDescriptor, ...]
    v: tuple[RegionDescriptor, ...]
    central: np.ndarray
    global_color: np.ndarray
    global_shape: np.ndarray
    fingerprint: str
    rois: dict = field(default_factory=dict, compare=False, repr=False)

    def region_sets(self) -> tuple[tuple[RegionDescriptor, ...], ...]:
        return self.grid, self.h, self.v

    def __eq__(self, other):
        if not isinstance(other, ImageSignature):
            return NotImplemented
        return (
            self.image_id == other.image_id
            and self.fingerprint == other.fingerprint
            and all(list(a) == list(b) for a, b in zip(self.region_sets(), other.region_sets()))
            and np.array_equal(self.central, other.central)
            and np.array_equal(self.global_color, other.global_color)
            and np.array_equal(self.global_shape, other.global_shape)
        )


def build_signature(img: np.ndarray, params: ExtractionParams | None = None, image_id: str = "") -> ImageSignature:
    params = params or ExtractionParams()
    height, width = img.shape[:2]
    if height < 8 or width < 8:
        raise ImageTooSmall(f"images must be at least 8x8, got {width}x{height}")

    gray = imaging.to_grayscale(img)
    mask = regions.object_mask_from_gray(gray, params.tau_s)

    sets = []
    rois = {}
    for scheme in (Scheme.GRID, Scheme.HORIZONTAL, Scheme.VERTICAL):
        rects = regions.partition(width, height, scheme, params.strip_count)
        roi: RoiSet = regions.select_rois(mask, rects, params.tau_r, scheme)
        rois[scheme] = roi
        sets.append(tuple(
            region_descriptor(img, gray, rects[cell], sig, params.levels, cell)
            for cell, sig in zip(roi.cells, roi.significances)
        ))

    center = regions.attention_center(
        img, params.border_crop, params.sigma, params.low_ratio, params.high_pct
    )
    block = regions.central_block_rect(width, height, center)

    return ImageSignature(
        image_id=image_id,
        grid=sets[0],
        h=sets[1],
        v=sets[2],
        central=_vec(region_vector(img, gray, block, params.levels)),
        global_color=_vec(hsv_histogram(img)),
        global_shape=_vec(ehd(gray, params.t_edge)),
        fingerprint=params.fingerprint(),
        rois=rois,
    )
