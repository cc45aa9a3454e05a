# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_kernels_py``; same algorithms, same order."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, floor, fabs, INFINITY

cdef double BIG = 1e100

cnp.import_array()


cdef inline double _shift(double m, double mp, double cb, double s, double c) noexcept nogil:
    # m cos(beta) - m' without cancellation when cos(beta) is close to +-1
    if cb >= 0.0:
        return (m - mp) - 2.0 * m * s * s
    return -(m + mp) + 2.0 * m * c * c


def wigner_d_matrix(int two_j, double beta):
    cdef Py_ssize_t size = two_j + 1
    cdef double J = 0.5 * two_j
    cdef double c = cos(0.5 * beta)
    cdef double s = sin(0.5 * beta)
    cdef double sb = sin(beta)
    cdef double cb = cos(beta)
    out_arr = np.zeros((size, size))
    cdef double[:, ::1] out = out_arr
    if size == 1:
        out[0, 0] = 1.0
        return out_arr
    if fabs(sb) < 1e-150:
        from kmetro._kernels_py import _degenerate
        return _degenerate(two_j, c, s)

    gp_arr = np.empty(size)
    gm_arr = np.empty(size)
    left_arr = np.zeros(size)
    cdef double[::1] gp = gp_arr
    cdef double[::1] gm = gm_arr
    cdef double[::1] left = left_arr
    cdef double m, mp, nxt, norm, sign, num, den, scale, big
    cdef Py_ssize_t j, q, row, col, centre, lo, hi
    with nogil:
        for j in range(size):
            m = j - J
            gp[j] = sqrt((J - m) * (J + m + 1.0))
            gm[j] = sqrt((J + m) * (J - m + 1.0))
        for row in range(size):
            mp = row - J
            sign = 1.0
            if c < 0.0 and row % 2:
                sign = -sign
            if s < 0.0 and (two_j - row) % 2:
                sign = -sign
            centre = <Py_ssize_t>floor(J + mp * cb + 0.5)
            if centre < 0:
                centre = 0
            if centre > size - 1:
                centre = size - 1
            lo = centre - 1 if centre > 0 else 0
            hi = centre + 1 if centre + 1 < size else size - 1

            out[row, size - 1] = sign
            col = size - 1
            while col > lo:
                m = col - J
                nxt = 2.0 * _shift(m, mp, cb, s, c) / sb * out[row, col]
                if col + 1 < size:
                    nxt = nxt - gp[col] * out[row, col + 1]
                out[row, col - 1] = nxt / gm[col]
                if fabs(out[row, col - 1]) > BIG:
                    big = 1.0 / fabs(out[row, col - 1])
                    for q in range(col - 1, size):
                        out[row, q] *= big
                col -= 1
            left[0] = 1.0
            for col in range(0, hi):
                m = col - J
                nxt = 2.0 * _shift(m, mp, cb, s, c) / sb * left[col]
                if col > 0:
                    nxt = nxt - gm[col] * left[col - 1]
                left[col + 1] = nxt / gp[col]
                if fabs(left[col + 1]) > BIG:
                    big = 1.0 / fabs(left[col + 1])
                    for q in range(0, col + 2):
                        left[q] *= big
            # bring both segments to O(1) so that the squares below stay finite
            big = 0.0
            for q in range(lo, size):
                if fabs(out[row, q]) > big:
                    big = fabs(out[row, q])
            for q in range(lo, size):
                out[row, q] /= big
            big = 0.0
            for q in range(0, hi + 1):
                if fabs(left[q]) > big:
                    big = fabs(left[q])
            for q in range(0, hi + 1):
                left[q] /= big
            num = 0.0
            den = 0.0
            for q in range(lo, hi + 1):
                num += out[row, q] * left[q]
                den += left[q] * left[q]
            scale = num / den
            for q in range(0, lo):
                out[row, q] = scale * left[q]
            norm = 0.0
            for q in range(size):
                norm += out[row, q] * out[row, q]
            norm = sqrt(norm)
            for q in range(size):
                out[row, q] /= norm
    return out_arr


def composition_extremes(levels, long n, int k, bint self_interactions):
    cdef double[::1] lv = np.ascontiguousarray(levels, dtype=np.float64)
    cdef Py_ssize_t L = lv.shape[0]
    binom_arr = np.zeros((n + 1, k + 1))
    cdef double[:, ::1] binom = binom_arr
    cdef long cc
    cdef int t, j
    for cc in range(n + 1):
        binom[cc, 0] = 1.0
        for t in range(1, k + 1):
            if t <= cc:
                binom[cc, t] = binom[cc, t - 1] * (cc - t + 1) / t
    cdef double kfact = 1.0
    for t in range(2, k + 1):
        kfact *= t
    counts_arr = np.zeros(L, dtype=np.int64)
    cmax_arr = np.zeros(L, dtype=np.int64)
    cmin_arr = np.zeros(L, dtype=np.int64)
    coef_arr = np.zeros(k + 1)
    new_arr = np.zeros(k + 1)
    cdef long long[::1] counts = counts_arr
    cdef long long[::1] cmax = cmax_arr
    cdef long long[::1] cmin = cmin_arr
    cdef double[::1] coef = coef_arr
    cdef double[::1] new = new_arr
    counts[0] = n
    cdef double vmax = -INFINITY, vmin = INFINITY, val, total, acc, p, lam
    cdef long long seen = 0, last, ci
    cdef Py_ssize_t i, q
    cdef int tmax
    with nogil:
        while True:
            seen += 1
            if self_interactions:
                total = 0.0
                for i in range(L):
                    total += counts[i] * lv[i]
                val = 1.0
                for t in range(k):
                    val *= total
            else:
                coef[0] = 1.0
                for j in range(1, k + 1):
                    coef[j] = 0.0
                for i in range(L):
                    ci = counts[i]
                    if ci == 0:
                        continue
                    lam = lv[i]
                    for j in range(k + 1):
                        acc = 0.0
                        p = 1.0
                        tmax = j if j < ci else <int>ci
                        for t in range(tmax + 1):
                            acc += binom[ci, t] * p * coef[j - t]
                            p *= lam
                        new[j] = acc
                    for j in range(k + 1):
                        coef[j] = new[j]
                val = kfact * coef[k]
            if val > vmax:
                vmax = val
                for i in range(L):
                    cmax[i] = counts[i]
            if val < vmin:
                vmin = val
                for i in range(L):
                    cmin[i] = counts[i]
            last = counts[L - 1]
            counts[L - 1] = 0
            q = L - 2
            while q >= 0 and counts[q] == 0:
                q -= 1
            if q < 0:
                break
            counts[q] -= 1
            counts[q + 1] = last + 1
    return (vmax, tuple(int(x) for x in cmax_arr), vmin,
            tuple(int(x) for x in cmin_arr), int(seen))
