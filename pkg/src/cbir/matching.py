"""Euclidean distance, greedy region matching and the total image distance.

The compiled kernel module is used when it imports; otherwise the
pure-Python one. Set ``CBIR_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import _fallback
from .errors import DimensionMismatch, EmptyRegionList, InvalidParameter, ParameterMismatch
from .features import COLOR_DIM, EHD_DIM, REGION_DIM, ImageSignature, RegionDescriptor

_BACKENDS = {"python": _fallback}
try:
    from . import _kernels
except ImportError:  # extension not built
    _kernels = None
else:
    _BACKENDS["cython"] = _kernels

if _kernels is not None and not os.environ.get("CBIR_PURE_PYTHON"):
    backend = _kernels
else:
    backend = _fallback

BACKEND = backend.NAME


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def get_backend(name: str | None = None):
    if name is None:
        return backend
    try:
        return _BACKENDS[name]
    except KeyError:
        raise InvalidParameter(f"unknown or unavailable backend {name!r}") from None


class MatchStep(NamedTuple):
    query_cell: int
    target_cell: int
    pair_distance: float
    transferred: float


def euclidean(f1, f2) -> float:
    """L2 distance, squares summed left to right."""
    a = np.asarray(f1, dtype=np.float64).ravel()
    b = np.asarray(f2, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DimensionMismatch(f"length {a.size} vs {b.size}")
    if a.size == 0:
        return 0.0
    d = a - b
    return float(math.sqrt(np.add.accumulate(d * d)[-1]))


def _stack(regions: Sequence[RegionDescriptor]) -> tuple[np.ndarray, np.ndarray]:
    feats = np.ascontiguousarray(np.array([r.feature for r in regions], dtype=np.float64))
    sigs = np.ascontiguousarray(np.array([r.significance for r in regions], dtype=np.float64))
    return feats, sigs


def irm_distance(
    r1: Sequence[RegionDescriptor],
    r2: Sequence[RegionDescriptor],
    backend_name: str | None = None,
) -> tuple[float, list[MatchStep]]:
    """Greedy minimum distance between two region sets.

    Each query region takes its nearest target region (lowest index on
    ties). While both significance budgets remain positive the pair distance
    is weighted by the smaller remaining significance, which is then
    subtracted from both; afterwards the raw minimum is added. The result
    depends on which argument is the query.
    """
    if not r1 or not r2:
        raise EmptyRegionList("both region lists must be nonempty")
    f1, s1 = _stack(r1)
    f2, s2 = _stack(r2)
    if f1.shape[1] != f2.shape[1]:
        raise DimensionMismatch(f"descriptor length {f1.shape[1]} vs {f2.shape[1]}")
    for s in (s1, s2):
        if abs(math.fsum(s) - 1.0) > 1e-6:
            raise InvalidParameter(f"significances must sum to 1, got {math.fsum(s)}")
    total, tj, td, ts = get_backend(backend_name).irm(f1, s1, f2, s2)
    trace = [
        MatchStep(r1[i].cell_index, r2[int(tj[i])].cell_index, float(td[i]), float(ts[i]))
        for i in range(len(r1))
    ]
    return float(total), trace


@dataclass(eq=False)
class PackedSignatures:
    """Signatures flattened into contiguous arrays for the scan kernels.

    Region sets (grid, horizontal, vertical) are stored as concatenated
    feature rows with CSR-style ``offsets`` per entry.
    """

    count: int
    dim: int
    feats: tuple[np.ndarray, np.ndarray, np.ndarray]
    sigs: tuple[np.ndarray, np.ndarray, np.ndarray]
    offsets: tuple[np.ndarray, np.ndarray, np.ndarray]
    central: np.ndarray
    color: np.ndarray
    shape: np.ndarray
    cache: dict = field(default_factory=dict)

    @classmethod
    def from_signatures(cls, sigs: Sequence[ImageSignature]) -> "PackedSignatures":
        def rows(arrs, width):
            if not arrs:
                return np.zeros((0, width))
            return np.ascontiguousarray(np.array(arrs, dtype=np.float64).reshape(len(arrs), width))

        feats, weights, offsets = [], [], []
        for k in range(3):
            regions = [r for s in sigs for r in s.region_sets()[k]]
            counts = [len(s.region_sets()[k]) for s in sigs]
            feats.append(rows([r.feature for r in regions], REGION_DIM))
            weights.append(np.array([r.significance for r in regions], dtype=np.float64))
            offsets.append(np.concatenate([[0], np.cumsum(counts, dtype=np.int64)]).astype(np.int64))
        return cls(
            count=len(sigs),
            dim=REGION_DIM,
            feats=tuple(feats),
            sigs=tuple(weights),
            offsets=tuple(offsets),
            central=rows([s.central for s in sigs], REGION_DIM),
            color=rows([s.global_color for s in sigs], COLOR_DIM),
            shape=rows([s.global_shape for s in sigs], EHD_DIM),
        )


def scan_distances(
    query: ImageSignature,
    packed: PackedSignatures,
    backend_name: str | None = None,
) -> np.ndarray:
    """Total distance from ``query`` to every packed entry, in entry order."""
    q = PackedSignatures.from_signatures([query])
    return get_backend(backend_name).scan(q, packed)


def total_distance(a: ImageSignature, b: ImageSignature, backend_name: str | None = None) -> float:
    """Sum of the grid, horizontal and vertical region distances, the global
    colour and shape distances, and the central-block distance."""
    if a.fingerprint != b.fingerprint:
        raise ParameterMismatch(f"fingerprints differ: {a.fingerprint} vs {b.fingerprint}")
    return float(scan_distances(a, PackedSignatures.from_signatures([b]), backend_name)[0])
