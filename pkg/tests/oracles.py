"""Naive reference implementations used as test oracles.

Deliberately written with plain loops and no package code, so they check the
optimized paths rather than repeat them.
"""

import math


def euclid(a, b):
    acc = 0.0
    for x, y in zip(a, b):
        d = float(x) - float(y)
        acc = acc + d * d
    return math.sqrt(acc)


def irm_simulate(f1, s1, f2, s2, eps=1e-12):
    """Step-by-step greedy matching; minimum by linear scan, no sorting."""
    w1 = [float(s) for s in s1]
    w2 = [float(s) for s in s2]
    D = 0.0
    for i in range(len(f1)):
        dists = [euclid(f1[i], f2[j]) for j in range(len(f2))]
        jmin = 0
        for j in range(len(dists)):
            if dists[j] < dists[jmin]:
                jmin = j
        t1 = 0.0
        for s in w1:
            t1 = t1 + s
        t2 = 0.0
        for s in w2:
            t2 = t2 + s
        if t1 > eps and t2 > eps:
            share = min(w1[i], w2[jmin])
            D = D + dists[jmin] * share
            w1[i] = w1[i] - share
            w2[jmin] = w2[jmin] - share
        else:
            D = D + dists[jmin]
    return D


def glcm_naive(block, levels, dr, dc):
    """Co-occurrence probabilities of a 2-D list of gray values."""
    h, w = len(block), len(block[0])
    counts = [[0] * levels for _ in range(levels)]
    total = 0
    for r in range(h):
        for c in range(w):
            r2, c2 = r + dr, c + dc
            if 0 <= r2 < h and 0 <= c2 < w:
                a = block[r][c] * levels // 256
                b = block[r2][c2] * levels // 256
                counts[a][b] += 1
                total += 1
    if total == 0:
        return [[0.0] * levels for _ in range(levels)]
    return [[counts[i][j] / total for j in range(levels)] for i in range(levels)]


def texture_naive(block, levels=16):
    """17 scaled texture values, same layout as the package."""
    offsets = [(0, 1), (-1, 1), (-1, 0), (-1, -1)]
    mats = [glcm_naive(block, levels, dr, dc) for dr, dc in offsets]
    con, ene, cor, hom = [], [], [], []
    for p in mats:
        c = e = h = 0.0
        mi = mj = 0.0
        for i in range(levels):
            for j in range(levels):
                c += (i - j) ** 2 * p[i][j]
                e += p[i][j] ** 2
                h += p[i][j] / (1 + abs(i - j))
                mi += i * p[i][j]
                mj += j * p[i][j]
        vi = vj = cv = 0.0
        for i in range(levels):
            for j in range(levels):
                vi += (i - mi) ** 2 * p[i][j]
                vj += (j - mj) ** 2 * p[i][j]
                cv += (i - mi) * (j - mj) * p[i][j]
        if vi < 1e-12 or vj < 1e-12:
            r = 0.0
        else:
            r = max(-1.0, min(1.0, cv / math.sqrt(vi * vj)))
        con.append(c / (levels - 1) ** 2)
        ene.append(e)
        cor.append((r + 1) / 2)
        hom.append(h)
    ent = 0.0
    for i in range(levels):
        for j in range(levels):
            q = sum(m[i][j] for m in mats) / 4
            if q > 0:
                ent -= q * math.log2(q)
    return con + ene + cor + hom + [ent / math.log2(levels * levels)]
