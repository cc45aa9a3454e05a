"""Precision bounds for k-body couplings.

* extreme eigenvalues of ``H = (sum_j h_j)^k`` (and of the variant without
  self interactions) and the state-independent Cramer-Rao bound they give;
* the leading-order variance of H for identical product states and the
  optimal single-constituent state;
* the short-time sensitivity of a J_y readout for coherent spin states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from kmetro import kernels
from kmetro.exact_moments import NoInformation, SensitivityPoint, make_point
from kmetro.spin_model import CouplingSpec, ExperimentClock, SingleBodySpectrum, clean_trig

SEARCH_BUDGET = 1_000_000


@dataclass(frozen=True)
class ExtremeResult:
    lambda_cap_max: float
    lambda_cap_min: float
    achieving_counts_max: tuple[int, ...]
    achieving_counts_min: tuple[int, ...]
    delta: float
    epsilon: Optional[float]  # None when it could not be determined
    exact: bool
    case: str = ""

    def __post_init__(self):
        if self.lambda_cap_max < self.lambda_cap_min:
            raise ValueError("Lambda_max < Lambda_min")

    @property
    def seminorm(self) -> float:
        return self.lambda_cap_max - self.lambda_cap_min


def _counts(levels, pairs) -> tuple[int, ...]:
    """Occupation vector over ``levels`` from ``{level: count}``."""
    return tuple(int(pairs.get(lv, 0)) for lv in levels)


def round_half_away(x: float) -> int:
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


def two_extreme_min(spectrum: SingleBodySpectrum, n: int, k: int):
    """Smallest ``(a lmax + (n - a) lmin)^k`` over strings using only the two
    extreme levels.  Returns ``(value, a, delta)``.

    ``a`` is the nearest integer to ``n |lmin| / ||h||``; on an exact tie
    both neighbours are tried and the smaller value kept.
    """
    hi, lo, norm = spectrum.lambda_max, spectrum.lambda_min, spectrum.seminorm
    target = n * abs(lo) / norm
    a0 = round_half_away(target)
    candidates = {min(max(a, 0), n) for a in (a0, a0 - 1, a0 + 1) if abs(a - target) <= 0.5}
    best = None
    for a in sorted(candidates):
        val = (a * hi + (n - a) * lo) ** k
        if best is None or abs(val) < abs(best[0]):
            best = (val, a)
    delta = abs(target - a0)
    return best[0], best[1], delta


def _search(spectrum: SingleBodySpectrum, coupling: CouplingSpec, levels=None):
    levels = spectrum.levels if levels is None else levels
    vmax, cmax, vmin, cmin, _ = kernels.composition_extremes(
        levels, coupling.n, coupling.k, coupling.self_interactions
    )
    return vmax, tuple(cmax), vmin, tuple(cmin)


def _expand(levels_sub, counts_sub, levels):
    return _counts(levels, dict(zip(levels_sub, counts_sub)))


def extreme_eigenvalues(
    spectrum: SingleBodySpectrum, coupling: CouplingSpec, budget: int = SEARCH_BUDGET
) -> ExtremeResult:
    """Largest and smallest eigenvalue of the k-body coupling Hamiltonian.

    With self interactions the odd-k and same-sign cases are closed form;
    for even k with a sign change the minimum comes from an exact search
    over occupation counts when ``C(n+L-1, L-1) <= budget`` and from the
    two-extreme construction (flagged inexact, epsilon unknown) otherwise.
    Without self interactions the search is always used, restricted to the
    two extreme levels (and flagged inexact) when over budget.
    """
    n, k = coupling.n, coupling.k
    levels = spectrum.levels
    hi, lo = spectrum.lambda_max, spectrum.lambda_min
    n_classes = math.comb(n + len(levels) - 1, len(levels) - 1)
    top = _counts(levels, {hi: n})
    bottom = _counts(levels, {lo: n})

    if not coupling.self_interactions:
        if n_classes <= budget:
            vmax, cmax, vmin, cmin = _search(spectrum, coupling)
            return ExtremeResult(vmax, vmin, cmax, cmin, 0.0, 0.0, True, "no-self")
        sub = (lo, hi)
        vmax, cmax, vmin, cmin = _search(spectrum, coupling, sub)
        return ExtremeResult(
            vmax, vmin, _expand(sub, cmax, levels), _expand(sub, cmin, levels), 0.0, None, False, "no-self"
        )

    if k % 2 == 1 or lo >= 0:
        case = "1" if k % 2 == 1 else "2"
        return ExtremeResult((n * hi) ** k, (n * lo) ** k, top, bottom, 0.0, 0.0, True, case)
    if hi <= 0:
        return ExtremeResult((n * lo) ** k, (n * hi) ** k, bottom, top, 0.0, 0.0, True, "3")

    # case 4: even k, lo < 0 < hi
    vmax = (n * max(hi, -lo)) ** k
    cmax = top if hi >= -lo else bottom
    two_val, a, delta = two_extreme_min(spectrum, n, k)
    two_counts = _counts(levels, {hi: a, lo: n - a} if hi != lo else {hi: n})
    if len(levels) == 2:
        return ExtremeResult(vmax, two_val, cmax, two_counts, delta, 0.0, True, "4")
    if n_classes > budget:
        return ExtremeResult(vmax, two_val, cmax, two_counts, delta, None, False, "4")
    _, _, vmin, cmin = _search(spectrum, coupling)
    if vmin < two_val:
        eps = delta - vmin ** (1.0 / k) / spectrum.seminorm
    else:
        vmin, cmin, eps = two_val, two_counts, 0.0
    return ExtremeResult(vmax, vmin, cmax, cmin, delta, max(eps, 0.0), True, "4")


def qcrb_entangled(extremes: ExtremeResult, clock: ExperimentClock) -> float:
    """``1 / (sqrt(nu) t (Lambda_max - Lambda_min))``."""
    gap = extremes.seminorm
    if gap <= 0:
        return NoInformation("Lambda_max = Lambda_min: H is proportional to the identity")
    return 1.0 / (math.sqrt(clock.nu) * clock.t * gap)


# ---------------------------------------------------------------------------
# product states


def product_variance_leading(spectrum: SingleBodySpectrum, coupling: CouplingSpec, x: float) -> float:
    """Leading-order ``(Delta H)^2 = k^2 n^(2k-1) x^(2(k-1)) (lmax - x)(x - lmin)``
    for ``n`` identical constituents with ``<h> = x``."""
    hi, lo = spectrum.lambda_max, spectrum.lambda_min
    if not lo <= x <= hi:
        raise ValueError(f"x={x!r} outside [{lo!r}, {hi!r}]")
    k, n = coupling.k, coupling.n
    return k * k * float(n) ** (2 * k - 1) * x ** (2 * (k - 1)) * (hi - x) * (x - lo)


def _stationary_profile(spectrum: SingleBodySpectrum, k: int, x):
    return x ** (2 * (k - 1)) * (spectrum.lambda_max - x) * (x - spectrum.lambda_min)


@dataclass(frozen=True)
class OptimalProductResult:
    x_plus: float
    x_minus: float
    p_plus: float
    p_minus: float
    beta_plus: float
    beta_minus: float
    beta_opt: float
    variance: float
    qcrb: float
    global_branch: str  # "plus", "minus" or "both"
    plus_in_domain: bool = True
    minus_in_domain: bool = True


def _beta_for(p: float) -> float:
    """Polar angle whose upper-level probability ``cos^2(beta/2)`` is ``p``."""
    return 2.0 * math.acos(math.sqrt(min(max(p, 0.0), 1.0)))


def optimal_product_state(
    spectrum: SingleBodySpectrum, k: int, n: int = 1, t: float = 1.0, nu: int = 1
) -> OptimalProductResult:
    """Stationary means ``x+-`` of the leading-order product-state variance,
    the branch that maximizes it, and the resulting bound ``1/(2 t sqrt(nu) Delta H)``.

    ``variance`` and ``qcrb`` are for ``n`` constituents (default 1, i.e. the
    coefficients of ``n^(2k-1)`` and ``n^-(k-1/2)``).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    hi, lo, norm, mean = spectrum.lambda_max, spectrum.lambda_min, spectrum.seminorm, spectrum.mean
    if k == 1:
        x_plus = x_minus = mean
    elif spectrum.is_symmetric:
        half = 0.5 * norm * math.sqrt(1.0 - 1.0 / k)
        x_plus, x_minus = half, -half
    else:
        centre = (1.0 - 0.5 / k) * mean
        half = 0.5 * math.sqrt(mean * mean / (k * k) + (1.0 - 1.0 / k) * norm * norm)
        x_plus, x_minus = centre + half, centre - half

    p_plus = (x_plus - lo) / norm
    p_minus = (x_minus - lo) / norm
    plus_ok = lo <= x_plus <= hi
    minus_ok = lo <= x_minus <= hi
    f_plus = _stationary_profile(spectrum, k, x_plus) if plus_ok else -math.inf
    f_minus = _stationary_profile(spectrum, k, x_minus) if minus_ok else -math.inf
    if k == 1 or math.isclose(f_plus, f_minus, rel_tol=1e-12):
        branch = "both"
    else:
        branch = "plus" if f_plus > f_minus else "minus"
    x_best = x_minus if branch == "minus" else x_plus

    nf = float(n)
    if spectrum.is_symmetric and k > 1:
        variance = k * (1.0 - 1.0 / k) ** (k - 1) * nf ** (2 * k - 1) * (0.5 * norm) ** (2 * k)
        qcrb = 2.0 ** (k - 1) / (
            math.sqrt(k) * (1.0 - 1.0 / k) ** (0.5 * (k - 1)) * t * math.sqrt(nu) * nf ** (k - 0.5) * norm**k
        )
    else:
        variance = k * k * nf ** (2 * k - 1) * _stationary_profile(spectrum, k, x_best)
        qcrb = NoInformation("zero variance") if variance <= 0 else 1.0 / (2.0 * t * math.sqrt(nu * variance))
    b_plus, b_minus = _beta_for(p_plus), _beta_for(p_minus)
    return OptimalProductResult(
        x_plus=x_plus,
        x_minus=x_minus,
        p_plus=p_plus,
        p_minus=p_minus,
        beta_plus=b_plus,
        beta_minus=b_minus,
        beta_opt=b_minus if branch == "minus" else b_plus,
        variance=variance,
        qcrb=qcrb,
        global_branch=branch,
        plus_in_domain=plus_ok,
        minus_in_domain=minus_ok,
    )


# ---------------------------------------------------------------------------
# short-time readout


def short_time_optimal_beta(k: int) -> float:
    """``beta`` in (0, pi/2] with ``sin beta = sqrt(1/k)``."""
    return math.asin(math.sqrt(1.0 / k))


def short_time_sensitivity(n: int, k: int, beta: float, nu: int = 1) -> SensitivityPoint:
    """J_y readout at ``phi -> 0`` for a coherent state of ``n`` qubits:
    slope ``k (n/2)^k sin(beta) cos(beta)^(k-1)``, noise ``sqrt(n)/2``."""
    if k < 1 or n < 1:
        raise ValueError("need n, k >= 1")
    cb, sb = clean_trig(beta)
    shape = sb * (cb ** (k - 1) if k > 1 else 1.0)
    slope = k * (0.5 * n) ** k * shape
    noise = 0.5 * math.sqrt(n)
    note = "" if n >= 10 * k else "n not much larger than k; short-time formula unreliable"
    point = make_point(0.0, "y", slope, noise, "short_time", tol=1e-12 * (0.5 * n) ** k, note=note)
    if not point.informative or nu == 1:
        return point
    return SensitivityPoint(
        point.phi, point.axis, point.delta_phi / math.sqrt(nu), point.slope, point.noise, point.model, point.note
    )


def short_time_scan(n: int, k: int, betas) -> np.ndarray:
    """``delta_phi`` over an array of angles (``inf`` where there is no signal)."""
    return np.array([short_time_sensitivity(n, k, b).delta_phi for b in np.asarray(betas, dtype=float)])
