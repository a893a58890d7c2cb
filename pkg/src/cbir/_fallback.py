"""Pure-Python matching kernels.

Mirrors ``_kernels.pyx`` operation for operation: squared differences are
accumulated strictly left to right (``np.add.accumulate`` rather than
``np.sum``, whose pairwise reduction reorders additions), so both backends
return bit-identical distances.
"""

from __future__ import annotations

import math

import numpy as np

NAME = "python"
EPS = 1e-12


def _euclid(a, b) -> float:
    acc = 0.0
    for x, y in zip(a, b):
        d = x - y
        acc += d * d
    return math.sqrt(acc)


def irm(f1: np.ndarray, s1: np.ndarray, f2: np.ndarray, s2: np.ndarray):
    """Greedy region matching of ``f1`` rows against ``f2`` rows.

    Returns ``(D, target_index, pair_distance, transferred)`` where the last
    three are per-query-region arrays.
    """
    rows1 = f1.tolist()
    rows2 = f2.tolist()
    sig1 = [float(s) for s in s1]
    sig2 = [float(s) for s in s2]
    m = len(rows1)
    tj = np.zeros(m, dtype=np.int64)
    td = np.zeros(m)
    ts = np.zeros(m)
    total = 0.0
    for i, a in enumerate(rows1):
        best = _euclid(a, rows2[0])
        bj = 0
        for j in range(1, len(rows2)):
            d = _euclid(a, rows2[j])
            if d < best:
                best, bj = d, j
        sum1 = 0.0
        for s in sig1:
            sum1 += s
        sum2 = 0.0
        for s in sig2:
            sum2 += s
        if sum1 > EPS and sum2 > EPS:
            sp = sig1[i] if sig1[i] < sig2[bj] else sig2[bj]
            total += best * sp
            sig1[i] -= sp
            sig2[bj] -= sp
        else:
            sp = 0.0
            total += best
        tj[i], td[i], ts[i] = bj, best, sp
    return total, tj, td, ts


def _seq_norm(diff: np.ndarray) -> np.ndarray:
    return np.sqrt(np.add.accumulate(diff * diff, axis=-1)[..., -1])


def _seq_sum(a: np.ndarray) -> np.ndarray:
    return np.add.accumulate(a, axis=-1)[..., -1]


def _padded(index, k: int):
    cache = index.cache.setdefault(NAME, {})
    if k not in cache:
        offs = index.offsets[k]
        counts = np.diff(offs)
        n = index.count
        width = int(counts.max()) if n else 0
        feats = np.zeros((n, width, index.dim))
        sigs = np.zeros((n, width))
        valid = np.zeros((n, width), dtype=bool)
        rows = np.repeat(np.arange(n), counts)
        cols = np.arange(int(offs[-1])) - np.repeat(offs[:-1], counts)
        feats[rows, cols] = index.feats[k]
        sigs[rows, cols] = index.sigs[k]
        valid[rows, cols] = True
        cache[k] = (feats, sigs, valid)
    return cache[k]


def _irm_many(qf: np.ndarray, qs: np.ndarray, feats, sigs, valid) -> np.ndarray:
    n = feats.shape[0]
    ar = np.arange(n)
    dist = _seq_norm(qf[:, None, None, :] - feats[None, :, :, :])
    dist[:, ~valid] = np.inf
    sig1 = np.tile(qs, (n, 1))
    sig2 = sigs.copy()
    total = np.zeros(n)
    for i in range(qf.shape[0]):
        row = dist[i]
        j = row.argmin(axis=1)
        dmin = row[ar, j]
        live = (_seq_sum(sig1) > EPS) & (_seq_sum(sig2) > EPS)
        sp = np.minimum(sig1[:, i], sig2[ar, j])
        total = np.where(live, total + dmin * sp, total + dmin)
        sig1[:, i] = np.where(live, sig1[:, i] - sp, sig1[:, i])
        sig2[ar, j] = np.where(live, sig2[ar, j] - sp, sig2[ar, j])
    return total


def scan(query, index) -> np.ndarray:
    """Total distance from the single packed ``query`` to every entry of ``index``."""
    if index.count == 0:
        return np.zeros(0)
    parts = [
        _irm_many(query.feats[k], query.sigs[k], *_padded(index, k))
        for k in range(3)
    ]
    color = _seq_norm(query.color[0] - index.color)
    shape = _seq_norm(query.shape[0] - index.shape)
    central = _seq_norm(query.central[0] - index.central)
    return (((parts[0] + parts[1]) + parts[2]) + (color + shape)) + central
