"""Partitions, attention center, central block and ROI selection."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import imaging
from .errors import ImageTooSmall, InvalidParameter
from .imaging import Point


class Rect(NamedTuple):
    x0: int
    y0: int
    w: int
    h: int

    def slice(self) -> tuple[slice, slice]:
        return slice(self.y0, self.y0 + self.h), slice(self.x0, self.x0 + self.w)


class Scheme(enum.Enum):
    GRID = "grid"
    HORIZONTAL = "h"
    VERTICAL = "v"


def _splits(length: int, parts: int) -> list[tuple[int, int]]:
    step = length // parts
    cuts = [(i * step, step) for i in range(parts - 1)]
    cuts.append(((parts - 1) * step, length - (parts - 1) * step))
    return cuts


def partition(width: int, height: int, scheme: Scheme, strip_count: int = 3) -> list[Rect]:
    """Tile the frame; the last row/column of cells absorbs any remainder.

    Grid cells are indexed row-major (``3 * row + col``); horizontal strips
    top-to-bottom and vertical strips left-to-right.
    """
    n = 3 if scheme is Scheme.GRID else strip_count
    if width < n or height < n:
        raise ImageTooSmall(f"{width}x{height} cannot be split into {n} cells per side")
    if scheme is Scheme.GRID:
        return [
            Rect(x0, y0, w, h)
            for (y0, h) in _splits(height, 3)
            for (x0, w) in _splits(width, 3)
        ]
    if scheme is Scheme.HORIZONTAL:
        return [Rect(0, y0, width, h) for (y0, h) in _splits(height, n)]
    return [Rect(x0, 0, w, height) for (x0, w) in _splits(width, n)]


def attention_center(
    img: np.ndarray,
    border_crop: int = 20,
    sigma: float = 2.0,
    low_ratio: float = 0.4,
    high_pct: float = 80.0,
) -> Point:
    """Centroid of the Canny edges of the border-cropped, blurred gray image.

    The crop is skipped when either dimension is not larger than
    ``2 * border_crop``. With no edges at all, the geometric center is
    returned.
    """
    h, w = img.shape[:2]
    dx = dy = 0
    if w > 2 * border_crop and h > 2 * border_crop:
        img = img[border_crop:h - border_crop, border_crop:w - border_crop]
        dx = dy = border_crop
    gray = imaging.gaussian_blur(imaging.to_grayscale(img), sigma)
    edges = imaging.canny_edges(gray, sigma=sigma, low_ratio=low_ratio, high_pct=high_pct)
    c = imaging.centroid(edges)
    if c is None:
        return Point(w / 2.0, h / 2.0)
    return Point(c.x + dx, c.y + dy)


def central_block_rect(width: int, height: int, center: Point) -> Rect:
    """Half-size rect centered on ``center``, shifted to lie inside the frame."""
    bw = max(1, int(math.floor(width / 2.0 + 0.5)))
    bh = max(1, int(math.floor(height / 2.0 + 0.5)))
    x0 = int(math.floor(center.x - bw / 2.0 + 0.5))
    y0 = int(math.floor(center.y - bh / 2.0 + 0.5))
    x0 = min(max(x0, 0), width - bw)
    y0 = min(max(y0, 0), height - bh)
    return Rect(x0, y0, bw, bh)


def object_mask(img: np.ndarray, tau_s: float = 0.10) -> np.ndarray:
    """Approximate object locations: Sobel threshold, line dilation, hole filling."""
    return object_mask_from_gray(imaging.to_grayscale(img), tau_s)


def object_mask_from_gray(gray: np.ndarray, tau_s: float = 0.10) -> np.ndarray:
    edges = imaging.sobel_edges(gray, tau_s)
    return imaging.fill_holes(imaging.dilate_line_se(edges))


@dataclass(frozen=True)
class RoiSet:
    """Selected cells of one partition with their significance weights.

    ``cells`` are 0-based positions in the partition; ``raw_densities`` the
    white-pixel fraction of each selected cell, and ``significances`` those
    densities normalized to sum 1.
    """

    scheme: Scheme
    cells: tuple[int, ...]
    raw_densities: tuple[float, ...]
    significances: tuple[float, ...]


def cell_densities(mask: np.ndarray, rects: list[Rect]) -> list[float]:
    return [float(np.count_nonzero(mask[r.slice()])) / (r.w * r.h) for r in rects]


def select_rois(
    mask: np.ndarray,
    rects: list[Rect],
    tau_r: float = 0.30,
    scheme: Scheme = Scheme.GRID,
) -> RoiSet:
    """Keep every cell whose density reaches ``tau_r`` of the densest cell.

    An empty mask selects all cells with uniform weight, so blank images stay
    queryable.
    """
    if not 0.0 < tau_r <= 1.0:
        raise InvalidParameter(f"tau_r must lie in (0, 1], got {tau_r}")
    if not rects:
        raise InvalidParameter("no cells to select from")
    dens = cell_densities(mask, rects)
    dmax = max(dens)
    if dmax == 0:
        n = len(rects)
        return RoiSet(scheme, tuple(range(n)), tuple(dens), tuple([1.0 / n] * n))
    cut = tau_r * dmax
    cells = tuple(i for i, d in enumerate(dens) if d >= cut)
    raw = tuple(dens[i] for i in cells)
    total = math.fsum(raw)
    return RoiSet(scheme, cells, raw, tuple(d / total for d in raw))
