"""Pure-Python reference versions of the hot kernels.

Both functions here are mirrored line for line by ``_kernels.pyx``; the
enumeration order (and therefore every tie-break) is identical.
"""
from __future__ import annotations

import math

import numpy as np

# a partial recursion is rescaled to O(1) once it passes _BIG; one step
# grows by at most ~2J / sin(beta) < 1e155, so nothing overflows
_BIG = 1e100


def wigner_d_matrix(two_j: int, beta: float) -> np.ndarray:
    """Full reduced rotation matrix ``d[m', m] = <J,m'| exp(-i beta J_y) |J,m>``.

    Rows and columns are indexed by ``J + m`` (0 .. 2J).  For each row the
    three-term recursion in ``m`` is run inwards from both edge columns to
    the classical centre ``m = m' cos(beta)``, so it never runs out of the
    oscillatory region, where it would be unstable.  The two halves are
    matched by least squares on the three overlap columns, the sign is fixed
    by the closed-form edge value ``d[m', J]`` and the row is normalized.
    """
    size = two_j + 1
    J = 0.5 * two_j
    c = math.cos(0.5 * beta)
    s = math.sin(0.5 * beta)
    sb = math.sin(beta)
    cb = math.cos(beta)
    out = np.zeros((size, size))
    if size == 1:
        out[0, 0] = 1.0
        return out
    if abs(sb) < 1e-150:
        # beta a multiple of pi: identity or anti-diagonal up to sign
        return _degenerate(two_j, c, s)

    gp = np.empty(size)
    gm = np.empty(size)
    for j in range(size):
        m = j - J
        gp[j] = math.sqrt((J - m) * (J + m + 1.0))
        gm[j] = math.sqrt((J + m) * (J - m + 1.0))
    left = np.zeros(size)
    for row in range(size):
        mp = row - J
        # sign of d[m', J] = sqrt(binom) c^(J+m') s^(J-m')
        sign = 1.0
        if c < 0.0 and row % 2:
            sign = -sign
        if s < 0.0 and (two_j - row) % 2:
            sign = -sign
        centre = int(math.floor(J + mp * cb + 0.5))
        centre = min(max(centre, 0), size - 1)
        lo = max(centre - 1, 0)
        hi = min(centre + 1, size - 1)

        # from m = J down to column lo
        out[row, size - 1] = sign
        for col in range(size - 1, lo, -1):
            m = col - J
            nxt = 2.0 * _shift(m, mp, cb, s, c) / sb * out[row, col]
            if col + 1 < size:
                nxt -= gp[col] * out[row, col + 1]
            out[row, col - 1] = nxt / gm[col]
            if abs(out[row, col - 1]) > _BIG:
                f = 1.0 / abs(out[row, col - 1])
                for q in range(col - 1, size):
                    out[row, q] *= f
        # from m = -J up to column hi
        left[0] = 1.0
        for col in range(0, hi):
            m = col - J
            nxt = 2.0 * _shift(m, mp, cb, s, c) / sb * left[col]
            if col > 0:
                nxt -= gm[col] * left[col - 1]
            left[col + 1] = nxt / gp[col]
            if abs(left[col + 1]) > _BIG:
                f = 1.0 / abs(left[col + 1])
                for q in range(0, col + 2):
                    left[q] *= f
        # bring both segments to O(1) so that the squares below stay finite
        big = 0.0
        for q in range(lo, size):
            big = max(big, abs(out[row, q]))
        for q in range(lo, size):
            out[row, q] /= big
        big = 0.0
        for q in range(0, hi + 1):
            big = max(big, abs(left[q]))
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
        norm = math.sqrt(norm)
        for q in range(size):
            out[row, q] /= norm
    return out



def _shift(m: float, mp: float, cb: float, s: float, c: float) -> float:
    # m cos(beta) - m' without cancellation when cos(beta) is close to +-1
    if cb >= 0.0:
        return (m - mp) - 2.0 * m * s * s
    return -(m + mp) + 2.0 * m * c * c


def _degenerate(two_j: int, c: float, s: float) -> np.ndarray:
    """``d`` at a multiple of pi, from the signs of the half-angle cosine and sine."""
    size = two_j + 1
    out = np.zeros((size, size))
    if abs(c) >= abs(s):
        # beta = 2 pi q: (-1)^(2J q) times the identity
        np.fill_diagonal(out, -1.0 if (c < 0 and two_j % 2) else 1.0)
    else:
        # beta = pi: d[m', m] = (-1)^(J - m) delta(m', -m); -pi adds (-1)^(2J)
        flip = -1.0 if (s < 0 and two_j % 2) else 1.0
        for col in range(size):
            out[size - 1 - col, col] = flip * (-1.0 if ((two_j - col) % 2) else 1.0)
    return out


def composition_extremes(levels, n: int, k: int, self_interactions: bool):
    """Scan every occupation-count vector of ``n`` constituents over ``levels``.

    The eigenvalue for counts ``c`` is ``(sum c_i l_i)**k`` with self
    interactions and ``k! * e_k`` of the multiset otherwise.  Returns
    ``(vmax, counts_max, vmin, counts_min, n_classes)``; ties keep the first
    vector in reverse-lexicographic order starting from ``(n, 0, ..., 0)``.
    """
    lv = [float(x) for x in levels]
    L = len(lv)
    binom = [[float(math.comb(c, t)) for t in range(k + 1)] for c in range(n + 1)]
    kfact = float(math.factorial(k))
    counts = [0] * L
    counts[0] = n
    vmax = -math.inf
    vmin = math.inf
    cmax = cmin = None
    seen = 0
    while True:
        seen += 1
        if self_interactions:
            total = 0.0
            for i in range(L):
                total += counts[i] * lv[i]
            val = 1.0
            for _ in range(k):
                val *= total
        else:
            coef = [1.0] + [0.0] * k
            for i in range(L):
                ci = counts[i]
                if ci == 0:
                    continue
                lam = lv[i]
                new = [0.0] * (k + 1)
                for j in range(k + 1):
                    acc = 0.0
                    p = 1.0
                    for t in range(0, min(j, ci) + 1):
                        acc += binom[ci][t] * p * coef[j - t]
                        p *= lam
                    new[j] = acc
                coef = new
            val = kfact * coef[k]
        if val > vmax:
            vmax = val
            cmax = tuple(counts)
        if val < vmin:
            vmin = val
            cmin = tuple(counts)
        # next composition
        last = counts[L - 1]
        counts[L - 1] = 0
        j = L - 2
        while j >= 0 and counts[j] == 0:
            j -= 1
        if j < 0:
            break
        counts[j] -= 1
        counts[j + 1] = last + 1
    return vmax, cmax, vmin, cmin, seen
