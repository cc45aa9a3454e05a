"""Brute-force reference computations.

Nothing in here calls the closed forms of :mod:`kmetro.exact_moments` or the
search in :mod:`kmetro.bounds`; the point is to check them from the ground up:
dense Dicke-basis states, ladder-operator algebra, literal string
enumeration and exact binomial sums.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from kmetro import kernels
from kmetro.exact_moments import MomentSet, SensitivityPoint, make_point
from kmetro.spin_model import (
    QUBIT,
    CoherentPreparation,
    CouplingSpec,
    DickeState,
    SingleBodySpectrum,
    coherent_amplitudes,
)

DENSE_LIMIT_2J = 20_000
ROTATION_LIMIT_2J = 512
CLASS_BUDGET = 1_000_000
STRING_BUDGET = 1 << 20


@dataclass(frozen=True)
class LadderCoefficients:
    """``J_+|m> = gamma_plus[m] |m+1>`` and ``J_-|m> = gamma_minus[m] |m-1>``, indexed by ``J + m``."""

    two_j: int
    gamma_plus: np.ndarray
    gamma_minus: np.ndarray

    @classmethod
    def for_spin(cls, two_j: int) -> "LadderCoefficients":
        J = 0.5 * two_j
        m = np.arange(two_j + 1) - J
        gp = np.sqrt(np.maximum((J - m) * (J + m + 1), 0.0))
        gm = np.sqrt(np.maximum((J + m) * (J - m + 1), 0.0))
        return cls(two_j, gp, gm)


def evolve(prep: CoherentPreparation, phi: float, k: int = 2) -> DickeState:
    """Apply ``exp(-i phi J_z^k)`` to the coherent state of ``prep``."""
    if prep.two_j > DENSE_LIMIT_2J:
        raise ValueError(f"2J={prep.two_j} exceeds the dense budget {DENSE_LIMIT_2J}")
    d = coherent_amplitudes(prep.J, prep.beta)
    m = np.arange(prep.two_j + 1) - prep.J
    return DickeState(prep.two_j, d * np.exp(-1j * phi * m**k))


def _raise(psi, lad: LadderCoefficients):
    out = np.zeros_like(psi)
    out[..., 1:] = lad.gamma_plus[:-1] * psi[..., :-1]
    return out


def _lower(psi, lad: LadderCoefficients):
    out = np.zeros_like(psi)
    out[..., :-1] = lad.gamma_minus[1:] * psi[..., 1:]
    return out


def _apply_components(two_j: int, psi: np.ndarray):
    """``(psi, J_x psi, J_y psi, J_z psi)``; ``psi`` may carry leading batch axes."""
    lad = LadderCoefficients.for_spin(two_j)
    up = _raise(psi, lad)
    down = _lower(psi, lad)
    jx = 0.5 * (up + down)
    jy = -0.5j * (up - down)
    jz = (np.arange(two_j + 1) - 0.5 * two_j) * psi
    return psi, jx, jy, jz


def _inner(u, v):
    return np.sum(np.conj(u) * v, axis=-1)


def moments_of_rows(two_j: int, psi: np.ndarray) -> MomentSet:
    """Dense moments for a stack of states (last axis is ``J + m``)."""
    psi, ax, ay, az = _apply_components(two_j, psi)

    def mean(v):
        return _inner(psi, v).real

    def sym(u, v):  # (1/2)<AB + BA> = Re <A psi | B psi> for Hermitian A, B
        return _inner(u, v).real

    return MomentSet(
        jx=mean(ax),
        jy=mean(ay),
        jz=mean(az),
        jx2=sym(ax, ax),
        jy2=sym(ay, ay),
        jz2=sym(az, az),
        jxjy_sym=sym(ax, ay),
        jzjx_sym=sym(az, ax),
        jzjy_sym=sym(az, ay),
        provenance="oracle",
    )


def slopes_of_rows(two_j: int, psi: np.ndarray, k: int = 2):
    """``d<J_x>/dphi`` and ``d<J_y>/dphi`` as ``i <[J_z^k, J_axis]>``."""
    psi, ax, ay, _ = _apply_components(two_j, psi)
    h_psi = (np.arange(two_j + 1) - 0.5 * two_j) ** k * psi
    return -2.0 * _inner(h_psi, ax).imag, -2.0 * _inner(h_psi, ay).imag


def collective_moments(state: DickeState) -> MomentSet:
    """First moments and symmetrized second moments by dense ladder algebra."""
    m = moments_of_rows(state.two_j, state.amplitudes)
    return MomentSet(**{k: float(v) for k, v in m.as_dict().items() if k != "provenance"}, provenance="oracle")


def heisenberg_slope(state: DickeState, axis: str, k: int = 2) -> float:
    """``d<J_axis>/dphi = i <[J_z^k, J_axis]>`` evaluated on the dense state."""
    sx, sy = slopes_of_rows(state.two_j, state.amplitudes, k)
    return float({"x": sx, "y": sy}[axis])


def sensitivity_dense(J, beta, phi, axis: str, k: int = 2) -> SensitivityPoint:
    state = evolve(CoherentPreparation.from_spin(J, beta), phi, k)
    m = collective_moments(state)
    var = m.var_x if axis == "x" else m.var_y
    slope = heisenberg_slope(state, axis, k)
    return make_point(phi, axis, slope, math.sqrt(max(var, 0.0)), "oracle")


def fd_slope(J, beta, axis: str, k: int, phi: float = 0.0, step: float = 1e-8) -> float:
    """Central finite difference of ``<J_axis>`` in phi, step scaled by the fringe rate."""
    prep = CoherentPreparation.from_spin(J, beta)
    h = step / max(1.0, 2.0 * prep.J * abs(math.cos(beta)))
    plus = collective_moments(evolve(prep, phi + h, k))
    minus = collective_moments(evolve(prep, phi - h, k))
    key = "j" + axis
    return (getattr(plus, key) - getattr(minus, key)) / (2.0 * h)


def _rotation(two_j: int) -> np.ndarray:
    return _rotation_cached(two_j)


_ROT_CACHE: dict[int, np.ndarray] = {}


def _rotation_cached(two_j: int) -> np.ndarray:
    if two_j not in _ROT_CACHE:
        _ROT_CACHE[two_j] = kernels.wigner_d_matrix(two_j, 0.5 * math.pi)
    return _ROT_CACHE[two_j]


def measurement_distribution(state: DickeState, axis: str) -> np.ndarray:
    """Outcome probabilities of a J_axis measurement, indexed by ``J + m``.

    J_x eigenstates are ``exp(-i pi/2 J_y)|m>``; J_y eigenstates are those
    rotated a further pi/2 about z.
    """
    if axis == "z":
        p = np.abs(state.amplitudes) ** 2
        return p / p.sum()
    if state.two_j > ROTATION_LIMIT_2J:
        raise ValueError(
            f"2J={state.two_j} exceeds the exact-rotation budget {ROTATION_LIMIT_2J}; use Gaussian sampling"
        )
    d = _rotation(state.two_j)
    c = state.amplitudes
    if axis == "x":
        amp = d.T @ c
    elif axis == "y":
        amp = d.T @ (np.exp(0.5j * math.pi * state.m_values) * c)
    else:
        raise ValueError(f"axis must be x, y or z, got {axis!r}")
    p = np.abs(amp) ** 2
    return p / p.sum()


# ---------------------------------------------------------------------------
# eigenvalue extremes by enumeration


@dataclass(frozen=True)
class EnumeratedExtremes:
    lambda_cap_max: float
    lambda_cap_min: float
    counts_max: tuple[int, ...]
    counts_min: tuple[int, ...]
    method: str


def _esp_rows(values: np.ndarray, k: int) -> np.ndarray:
    """Elementary symmetric polynomial ``e_k`` of every row, by the one-variable-at-a-time recursion."""
    e = np.zeros((values.shape[0], k + 1))
    e[:, 0] = 1.0
    for col in range(values.shape[1]):
        lam = values[:, col]
        for j in range(k, 0, -1):
            e[:, j] += lam * e[:, j - 1]
    return e[:, k]


def string_extremes(spectrum: SingleBodySpectrum, coupling: CouplingSpec) -> EnumeratedExtremes:
    """Largest/smallest eigenvalue of the coupling Hamiltonian by enumeration.

    Literal eigenvalue strings are used while ``L**n`` is small; otherwise
    occupation classes (multisets) via ``combinations_with_replacement``.
    Without self interactions the value is ``k! e_k`` of the string.
    """
    levels = np.array(spectrum.levels)
    L, n, k = len(levels), coupling.n, coupling.k
    if L**n <= STRING_BUDGET:
        idx = np.array(list(itertools.product(range(L), repeat=n)), dtype=np.int64)
        method = "strings"
    else:
        if math.comb(n + L - 1, L - 1) > CLASS_BUDGET:
            raise ValueError("occupation-class count exceeds the enumeration budget")
        idx = np.array(list(itertools.combinations_with_replacement(range(L), n)), dtype=np.int64)
        method = "classes"
    vals = levels[idx]
    if coupling.self_interactions:
        eig = vals.sum(axis=1) ** k
    else:
        eig = math.factorial(k) * _esp_rows(vals, k)
    imax, imin = int(np.argmax(eig)), int(np.argmin(eig))

    def counts(row):
        return tuple(int(c) for c in np.bincount(idx[row], minlength=L))

    return EnumeratedExtremes(float(eig[imax]), float(eig[imin]), counts(imax), counts(imin), method)


# ---------------------------------------------------------------------------
# exact product-state variance


def _binomial_weights(n: int, p: float) -> np.ndarray:
    from scipy.stats import binom

    w = binom.pmf(np.arange(n + 1), n, p)
    return w / w.sum()


def _esp_two_level(a: np.ndarray, n: int, k: int, lam_hi: float, lam_lo: float) -> np.ndarray:
    """``e_k`` for ``a`` copies of ``lam_hi`` and ``n - a`` of ``lam_lo``:
    the x^k coefficient of ``(1 + lam_hi x)^a (1 + lam_lo x)^(n-a)``."""
    from scipy.special import comb

    out = np.zeros(a.shape)
    for j in range(k + 1):
        out += comb(a, j) * comb(n - a, k - j) * lam_hi**j * lam_lo ** (k - j)
    return out


def product_variance_exact(
    p: float, n: int, k: int, self_interactions: bool = True, spectrum: SingleBodySpectrum = QUBIT
) -> float:
    """Exact ``(Delta H)^2`` for ``n`` independent two-level constituents, each in
    the upper level with probability ``p``.  H is diagonal, so this is a
    classical binomial computation (two-pass, no large cancellations)."""
    a = np.arange(n + 1, dtype=float)
    w = _binomial_weights(n, p)
    hi, lo = spectrum.lambda_max, spectrum.lambda_min
    if self_interactions:
        eig = (lo * n + a * (hi - lo)) ** k
    else:
        eig = math.factorial(k) * _esp_two_level(a, n, k, hi, lo)
    mean = float(np.dot(w, eig))
    return float(np.dot(w, (eig - mean) ** 2))


# ---------------------------------------------------------------------------
# binomial identities behind the closed forms


def identity_residuals(J, a: float, b: float) -> tuple[float, float, float]:
    """Relative residuals of the three weighted binomial sums used in the
    moment derivations, by direct summation over ``m``."""
    two_j = int(round(2 * float(J)))
    if abs(2 * float(J) - two_j) > 1e-12 or two_j < 1:
        raise ValueError("J must be a positive half-integer")
    Jv = 0.5 * two_j
    terms1, terms2, terms3 = [], [], []
    for i in range(two_j + 1):  # i = J - m
        m = Jv - i
        base = math.comb(two_j, i) * a ** (Jv + m) * b ** (Jv - m)
        terms1.append((Jv - m) * base)
        terms2.append((Jv * Jv - m * m) * base)
        terms3.append((Jv - m) * (Jv - m - 1) * base)
    s = a + b
    rhs1 = two_j * b * s ** (two_j - 1)
    rhs2 = two_j * (two_j - 1) * a * b * s ** (two_j - 2) if two_j >= 2 else 0.0
    rhs3 = two_j * (two_j - 1) * b * b * s ** (two_j - 2) if two_j >= 2 else 0.0

    def rel(lhs_terms, rhs):
        lhs = math.fsum(lhs_terms)
        scale = max(abs(rhs), math.fsum(abs(t) for t in lhs_terms), 1e-300)
        return abs(lhs - rhs) / scale

    return rel(terms1, rhs1), rel(terms2, rhs2), rel(terms3, rhs3)


# ---------------------------------------------------------------------------
# closed forms against dense simulation


MOMENT_KEYS = ("jx", "jy", "jz", "jx2", "jy2", "jz2", "jxjy_sym", "jzjx_sym", "jzjy_sym")


@dataclass(frozen=True)
class GridReport:
    """``max_ratio`` is the worst ``|closed - dense| / allowed``; 1 or less passes."""

    max_ratio: float
    max_relative: float
    worst: str
    points: int
    rtol: float
    atol: float

    @property
    def passed(self) -> bool:
        return self.max_ratio <= 1.0


def allowed_error(reference, scale, rtol=1e-10, atol=1e-12):
    """``rtol |reference| + atol * scale``.

    ``scale`` is the size of the largest term in the dense sum divided by
    that of a unit quantity: 1 for first moments, ``J`` for second moments,
    ``J^2`` for variances (a difference of two ``J^2``-sized numbers) and
    ``J^k`` for commutator slopes.  A dense sum is
    only known to ~1e-16 of its largest term, so a moment that happens to
    cross zero cannot be checked to better than that.
    """
    return rtol * np.abs(reference) + atol * scale


def compare_grid(max_two_j: int = 50, grid: int = 16, k: int = 2, rtol=1e-10, atol=1e-12) -> GridReport:
    """Every closed-form moment, slope and readout variance against dense evolution over
    ``2J = 1..max_two_j`` and a ``grid x grid`` midpoint grid in (0, pi) x (-pi, pi)."""
    from kmetro import exact_moments as em

    betas = (np.arange(grid) + 0.5) * math.pi / grid
    phis = -math.pi + (np.arange(grid) + 0.5) * 2.0 * math.pi / grid
    worst, worst_rel, where, points = 0.0, 0.0, "", 0
    for two_j in range(1, max_two_j + 1):
        J = 0.5 * two_j
        u = max(1.0, J)
        m = np.arange(two_j + 1) - J
        phase = np.exp(-1j * np.outer(phis, m**k))
        for beta in betas:
            psi = coherent_amplitudes(J, beta) * phase
            dense = moments_of_rows(two_j, psi)
            closed = em.moments_exact(J, beta, phis)
            checks = [
                (key, getattr(closed, key), getattr(dense, key), 1.0 if key in ("jx", "jy", "jz") else u)
                for key in MOMENT_KEYS
            ]
            sx, sy = slopes_of_rows(two_j, psi, k)
            for axis, s_dense, v_dense in (("x", sx, dense.var_x), ("y", sy, dense.var_y)):
                checks.append(("slope_" + axis, em.exact_slope(J, beta, phis, axis), s_dense, u**k))
                # variance, not its root: sqrt turns 1e-16 J^2 of roundoff at a
                # zero variance into 1e-8 J
                checks.append(("var_" + axis, em.exact_variance(J, beta, phis, axis), v_dense, u * u))
            for key, a, b, scale in checks:
                diff = np.abs(np.asarray(a) - b)
                ratio = diff / allowed_error(b, scale, rtol, atol)
                i = int(np.argmax(ratio))
                if ratio[i] > worst:
                    worst = float(ratio[i])
                    where = f"{key} at 2J={two_j}, beta={float(beta)!r}, phi={float(phis[i])!r}"
                big = np.abs(b) > atol * scale / rtol
                if np.any(big):
                    worst_rel = max(worst_rel, float(np.max(diff[big] / np.abs(b[big]))))
            points += len(phis)
    return GridReport(worst, worst_rel, where, points, rtol, atol)
