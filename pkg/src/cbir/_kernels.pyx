# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled matching kernels.

Same float operations, in the same order, as ``_fallback``; build without
fast-math or FMA contraction so results stay bit-identical.
"""

from libc.math cimport sqrt

import numpy as np

NAME = "cython"

cdef double EPS = 1e-12


cdef inline double _euclid(const double* a, const double* b, Py_ssize_t n) noexcept nogil:
    cdef double acc = 0.0
    cdef double d
    cdef Py_ssize_t k
    for k in range(n):
        d = a[k] - b[k]
        acc = acc + d * d
    return sqrt(acc)


cdef double _irm(const double* f1, const double* s1_in, Py_ssize_t m,
                 const double* f2, const double* s2_in, Py_ssize_t n,
                 Py_ssize_t dim, double* s1, double* s2,
                 long long* tj, double* td, double* ts) noexcept nogil:
    cdef Py_ssize_t i, j, bj
    cdef double total = 0.0
    cdef double best, d, sum1, sum2, sp
    for i in range(m):
        s1[i] = s1_in[i]
    for j in range(n):
        s2[j] = s2_in[j]
    for i in range(m):
        best = _euclid(f1 + i * dim, f2, dim)
        bj = 0
        for j in range(1, n):
            d = _euclid(f1 + i * dim, f2 + j * dim, dim)
            if d < best:
                best = d
                bj = j
        sum1 = 0.0
        for j in range(m):
            sum1 = sum1 + s1[j]
        sum2 = 0.0
        for j in range(n):
            sum2 = sum2 + s2[j]
        if sum1 > EPS and sum2 > EPS:
            sp = s1[i] if s1[i] < s2[bj] else s2[bj]
            total = total + best * sp
            s1[i] = s1[i] - sp
            s2[bj] = s2[bj] - sp
        else:
            sp = 0.0
            total = total + best
        if tj != NULL:
            tj[i] = bj
            td[i] = best
            ts[i] = sp
    return total


def irm(const double[:, ::1] f1, const double[::1] s1,
        const double[:, ::1] f2, const double[::1] s2):
    """Greedy region matching; returns ``(D, target_index, pair_distance, transferred)``."""
    cdef Py_ssize_t m = f1.shape[0], n = f2.shape[0], dim = f1.shape[1]
    if m == 0 or n == 0:
        raise ValueError("empty region list")
    if f2.shape[1] != dim or s1.shape[0] != m or s2.shape[0] != n:
        raise ValueError("shape mismatch")
    w1 = np.empty(m)
    w2 = np.empty(n)
    tj = np.zeros(m, dtype=np.int64)
    td = np.zeros(m)
    ts = np.zeros(m)
    cdef double[::1] w1v = w1, w2v = w2, tdv = td, tsv = ts
    cdef long long[::1] tjv = tj
    cdef double total
    with nogil:
        total = _irm(&f1[0, 0], &s1[0], m, &f2[0, 0], &s2[0], n, dim,
                     &w1v[0], &w2v[0], &tjv[0], &tdv[0], &tsv[0])
    return total, tj, td, ts


def scan(query, index):
    """Total distance from the single packed ``query`` to every entry of ``index``."""
    cdef Py_ssize_t count = index.count
    out = np.zeros(count)
    if count == 0:
        return out
    cdef Py_ssize_t dim = index.dim
    cdef Py_ssize_t cdim = index.color.shape[1], sdim = index.shape.shape[1]
    cdef const double* qf[3]
    cdef const double* qs[3]
    cdef Py_ssize_t qm[3]
    cdef const double* tf[3]
    cdef const double* tsg[3]
    cdef const long long* toff[3]
    cdef const double[:, ::1] mv2
    cdef const double[::1] mv1
    cdef const long long[::1] mvo
    cdef Py_ssize_t k, e, nmax = 1, mmax = 1
    for k in range(3):
        mv2 = query.feats[k]
        qf[k] = &mv2[0, 0]
        qm[k] = mv2.shape[0]
        mv1 = query.sigs[k]
        qs[k] = &mv1[0]
        mv2 = index.feats[k]
        tf[k] = &mv2[0, 0]
        mv1 = index.sigs[k]
        tsg[k] = &mv1[0]
        mvo = index.offsets[k]
        toff[k] = &mvo[0]
        mmax = max(mmax, qm[k])
        nmax = max(nmax, int(np.diff(index.offsets[k]).max()))

    cdef const double[:, ::1] qc = query.central, qcol = query.color, qsh = query.shape
    cdef const double[:, ::1] ic = index.central, icol = index.color, ish = index.shape
    w1 = np.empty(mmax)
    w2 = np.empty(nmax)
    cdef double[::1] w1v = w1, w2v = w2, outv = out
    cdef double g, hh, vv, ec, es, en
    cdef Py_ssize_t a0, a1, b0, b1, c0, c1
    with nogil:
        for e in range(count):
            a0 = toff[0][e]
            a1 = toff[0][e + 1]
            b0 = toff[1][e]
            b1 = toff[1][e + 1]
            c0 = toff[2][e]
            c1 = toff[2][e + 1]
            g = _irm(qf[0], qs[0], qm[0], tf[0] + a0 * dim, tsg[0] + a0, a1 - a0, dim,
                     &w1v[0], &w2v[0], NULL, NULL, NULL)
            hh = _irm(qf[1], qs[1], qm[1], tf[1] + b0 * dim, tsg[1] + b0, b1 - b0, dim,
                      &w1v[0], &w2v[0], NULL, NULL, NULL)
            vv = _irm(qf[2], qs[2], qm[2], tf[2] + c0 * dim, tsg[2] + c0, c1 - c0, dim,
                      &w1v[0], &w2v[0], NULL, NULL, NULL)
            ec = _euclid(&qcol[0, 0], &icol[e, 0], cdim)
            es = _euclid(&qsh[0, 0], &ish[e, 0], sdim)
            en = _euclid(&qc[0, 0], &ic[e, 0], dim)
            outv[e] = (((g + hh) + vv) + (ec + es)) + en
    return out
