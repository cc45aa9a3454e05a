"""Closed-form moments and sensitivities for H = gamma J_z^2.

Everything here is vectorized over ``phi`` (and broadcasts over ``beta``), so
a scan is a single call.  Powers such as ``(cos phi + i sin phi cos beta)^(2J-1)``
are formed in log-polar form with the phase reduced mod 2 pi in double-double
arithmetic, which keeps J = 1e7 usable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from kmetro.spin_model import clean_trig, two_j_of

# 2 pi as an unevaluated sum hi + lo
_TWO_PI_HI = 6.283185307179586
_TWO_PI_LO = 2.4492935982947064e-16
_SPLIT = 134217729.0  # 2**27 + 1


class NoInformation(float):
    """An infinite sensitivity that carries why no estimate is possible.

    Behaves like ``inf`` in arithmetic and comparisons, so callers that only
    want a number still work, while tables can print ``reason`` instead.
    """

    def __new__(cls, reason: str = "zero signal"):
        obj = super().__new__(cls, math.inf)
        obj.reason = reason
        return obj

    def __repr__(self):
        return f"NoInformation({self.reason!r})"

    def __reduce__(self):
        return (NoInformation, (self.reason,))


def is_informative(value) -> bool:
    return not isinstance(value, NoInformation) and math.isfinite(value)


@dataclass(frozen=True)
class PolarFactors:
    r: np.ndarray
    theta: np.ndarray
    R: np.ndarray
    Theta: np.ndarray
    dr: np.ndarray
    dtheta: np.ndarray
    dR: np.ndarray
    dTheta: np.ndarray


def polar_factors(beta, phi) -> PolarFactors:
    """Modulus/phase of ``cos phi + i sin phi cos beta`` and of its double-angle
    sibling, with their phi-derivatives."""
    cb, sb = clean_trig(beta)
    phi = np.asarray(phi, dtype=float)
    c1, s1 = np.cos(phi), np.sin(phi)
    c2, s2 = np.cos(2 * phi), np.sin(2 * phi)
    r = np.sqrt(1.0 - (s1 * sb) ** 2)
    R = np.sqrt(1.0 - (s2 * sb) ** 2)
    theta = np.arctan2(s1 * cb, c1)
    Theta = np.arctan2(s2 * cb, c2)
    with np.errstate(divide="ignore", invalid="ignore"):
        dr = -(sb**2) * s1 * c1 / r
        dtheta = cb / r**2
        dR = -2.0 * sb**2 * s2 * c2 / R
        dTheta = 2.0 * cb / R**2
    return PolarFactors(r, theta, R, Theta, dr, dtheta, dR, dTheta)


def _two_product(a, b):
    """Error-free product: ``a*b == hi + lo`` exactly (Dekker/Veltkamp)."""
    hi = a * b
    ca = _SPLIT * a
    a_hi = ca - (ca - a)
    a_lo = a - a_hi
    cb = _SPLIT * b
    b_hi = cb - (cb - b)
    b_lo = b - b_hi
    lo = ((a_hi * b_hi - hi) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo
    return hi, lo


def reduced_phase(p, theta):
    """``p * theta`` reduced to (-pi, pi], with the product and the reduction
    both carried in double-double so large ``p`` keeps the phase accurate."""
    p = np.asarray(p, dtype=float)
    theta = np.asarray(theta, dtype=float)
    hi, lo = _two_product(p, theta)
    turns = np.round(hi / _TWO_PI_HI)
    t_hi, t_lo = _two_product(turns, _TWO_PI_HI)
    out = (hi - t_hi) + (lo - t_lo - turns * _TWO_PI_LO)
    return out


def _power(log_mod, theta, p):
    """``(modulus, phase)`` of ``z**p`` for integer ``p >= 0`` given ``log|z|`` and ``arg z``.

    ``0**0`` is 1; a zero base with positive exponent gives modulus 0.
    """
    p = np.asarray(p, dtype=float)
    with np.errstate(invalid="ignore"):
        a = np.where(p == 0, 0.0, p * log_mod)
    a = np.where(np.isnan(a), -np.inf, a)
    return a, reduced_phase(p, theta)


def _one_minus_re(a, psi):
    """``1 - exp(a) cos(psi)`` without cancellation near ``a = psi = 0``."""
    return -np.expm1(a) + 2.0 * np.exp(a) * np.sin(0.5 * psi) ** 2


@dataclass(frozen=True)
class MomentSet:
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray
    jx2: np.ndarray
    jy2: np.ndarray
    jz2: np.ndarray
    jxjy_sym: np.ndarray
    jzjx_sym: np.ndarray
    jzjy_sym: np.ndarray
    provenance: str = "exact"

    def as_dict(self) -> dict:
        keys = ("jx", "jy", "jz", "jx2", "jy2", "jz2", "jxjy_sym", "jzjx_sym", "jzjy_sym")
        return {k: _plain(getattr(self, k)) for k in keys} | {"provenance": self.provenance}

    @property
    def var_x(self):
        return self.jx2 - self.jx**2

    @property
    def var_y(self):
        return self.jy2 - self.jy**2

    @property
    def var_z(self):
        return self.jz2 - self.jz**2


def _plain(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x.tolist()


@dataclass(frozen=True)
class SensitivityPoint:
    phi: float
    axis: str
    delta_phi: float
    slope: float
    noise: float
    model: str = "exact"
    note: str = field(default="", compare=False)

    @property
    def informative(self) -> bool:
        return is_informative(self.delta_phi)

    def as_dict(self) -> dict:
        d = {
            "phi": self.phi,
            "axis": self.axis,
            "delta_phi": self.delta_phi if self.informative else "no-information",
            "slope": self.slope,
            "noise": self.noise,
            "model": self.model,
        }
        if self.note:
            d["note"] = self.note
        return d


def make_point(phi, axis, slope, noise, model, tol=1e-300, note="") -> SensitivityPoint:
    slope = float(slope)
    noise = float(noise)
    if abs(slope) < tol:
        delta = NoInformation(f"zero slope of <J_{axis}> at phi={float(phi)!r}")
    else:
        delta = noise / abs(slope)
    return SensitivityPoint(float(phi), axis, delta, slope, noise, model, note)


# ---------------------------------------------------------------------------
# exact closed forms


@dataclass(frozen=True)
class _Parts:
    """The three complex building blocks and what is needed for derivatives."""

    J: float
    sb: np.ndarray
    cb: np.ndarray
    a1: np.ndarray  # log modulus of z1**(2J-1)
    psi1: np.ndarray  # reduced phase of z1**(2J-1)
    a2: np.ndarray  # same for z2**(2J-2)
    psi2: np.ndarray
    a1m: np.ndarray  # z1**(2J-2), for derivative and cross moment
    psi1m: np.ndarray


def _parts(J, beta, phi) -> _Parts:
    two_j = two_j_of(J)
    J = 0.5 * two_j
    cb, sb = clean_trig(beta)
    phi = np.asarray(phi, dtype=float)
    s1, c1 = np.sin(phi), np.cos(phi)
    s2, c2 = np.sin(2 * phi), np.cos(2 * phi)
    # log r = 0.5 log1p(-sin^2 phi sin^2 beta)
    with np.errstate(divide="ignore"):
        log_r = 0.5 * np.log1p(-((s1 * sb) ** 2))
        log_R = 0.5 * np.log1p(-((s2 * sb) ** 2))
    theta = np.arctan2(s1 * cb, c1)
    Theta = np.arctan2(s2 * cb, c2)
    a1, psi1 = _power(log_r, theta, two_j - 1)
    if two_j >= 2:
        a2, psi2 = _power(log_R, Theta, two_j - 2)
        a1m, psi1m = _power(log_r, theta, two_j - 2)
    else:
        # J = 1/2: every term using these carries the factor 2J - 1 = 0
        a2 = psi2 = a1m = psi1m = np.zeros_like(phi)
    return _Parts(J, sb, cb, a1, psi1, a2, psi2, a1m, psi1m)


def _jplus(P: _Parts):
    return P.J * P.sb * np.exp(P.a1) * np.exp(1j * P.psi1)


def _jplus_sq(P: _Parts):
    return 0.5 * P.J * (2 * P.J - 1) * P.sb**2 * np.exp(P.a2) * np.exp(1j * P.psi2)


def _jplus_slope(P: _Parts, phi):
    """d<J_+>/dphi = J sin(beta) (2J-1) z1^(2J-2) dz1/dphi."""
    phi = np.asarray(phi, dtype=float)
    dz1 = -np.sin(phi) + 1j * np.cos(phi) * P.cb
    return P.J * P.sb * (2 * P.J - 1) * np.exp(P.a1m) * np.exp(1j * P.psi1m) * dz1


def moments_exact(J, beta, phi) -> MomentSet:
    """All first and second moments of J after ``exp(-i phi J_z^2)`` acts on
    the coherent state at polar angle ``beta``."""
    P = _parts(J, beta, phi)
    phi = np.asarray(phi, dtype=float)
    Jv = P.J
    jp = _jplus(P)
    jp2 = _jplus_sq(P)
    sym = Jv + 0.5 * Jv * (2 * Jv - 1) * P.sb**2  # (1/2)<J+J- + J-J+>
    # (1/2)<J_z J_+ + J_+ J_z>
    pref = np.cos(phi) * P.cb + 1j * np.sin(phi)
    zc = 0.5 * Jv * (2 * Jv - 1) * P.sb * pref * np.exp(P.a1m) * np.exp(1j * P.psi1m)
    jz = Jv * P.cb + np.zeros_like(phi)
    jz2 = Jv**2 * P.cb**2 + 0.5 * Jv * P.sb**2 + np.zeros_like(phi)
    return MomentSet(
        jx=jp.real,
        jy=jp.imag,
        jz=jz,
        jx2=0.5 * sym + 0.5 * jp2.real,
        jy2=0.5 * sym - 0.5 * jp2.real,
        jz2=jz2,
        jxjy_sym=0.5 * jp2.imag,
        jzjx_sym=zc.real,
        jzjy_sym=zc.imag,
        provenance="exact",
    )


def exact_variance(J, beta, phi, axis: str):
    """Variance of J_x or J_y, arranged so that nothing of size J^2 cancels
    when the variance itself is O(1) (beta near pi/2, phi ~ 1/J)."""
    P = _parts(J, beta, phi)
    Jv = P.J
    q = 0.25 * Jv * (2 * Jv - 1) * P.sb**2
    d2 = _one_minus_re(P.a2, P.psi2)  # 1 - Re z2^(2J-2)
    if axis == "x":
        d1 = _one_minus_re(P.a1, P.psi1)  # 1 - Re z1^(2J-1)
        var = 0.5 * Jv * P.cb**2 - q * d2 + Jv**2 * P.sb**2 * d1 * (2.0 - d1)
    elif axis == "y":
        y1 = np.exp(P.a1) * np.sin(P.psi1)
        var = 0.5 * Jv + q * d2 - Jv**2 * P.sb**2 * y1**2
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    return np.maximum(var, 0.0)


def exact_slope(J, beta, phi, axis: str):
    P = _parts(J, beta, phi)
    d = _jplus_slope(P, phi)
    return d.real if axis == "x" else d.imag


def sensitivity_exact(J, beta, phi, axis: str) -> SensitivityPoint:
    """Error-propagation sensitivity ``Delta J_axis / |d<J_axis>/dphi|``."""
    if axis not in ("x", "y"):
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    slope = exact_slope(J, beta, phi, axis)
    noise = np.sqrt(exact_variance(J, beta, phi, axis))
    return make_point(phi, axis, slope, noise, "exact")


def sensitivity_scan(J, beta, phis, axis: str) -> np.ndarray:
    """Exact delta-phi over an array of phases; zero-slope points are ``inf``."""
    slope = exact_slope(J, beta, phis, axis)
    noise = np.sqrt(exact_variance(J, beta, phis, axis))
    dead = np.abs(slope) < 1e-300
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(dead, np.inf, noise / np.where(dead, 1.0, np.abs(slope)))


# ---------------------------------------------------------------------------
# approximations


def fringe_valid(J, beta, phi) -> bool:
    return bool(np.all(math.sqrt(J) * np.abs(phi) * abs(math.sin(beta)) < 1.0))


def fringe_model(J, beta, phi):
    """Uniform-fringe (rigidly rotating coherent state) moments and both sensitivities.

    Returns ``(moments, point_x, point_y, valid)``.
    """
    two_j = two_j_of(J)
    Jv = 0.5 * two_j
    cb, sb = clean_trig(beta)
    phi_f = float(phi)
    arg = 2.0 * Jv * phi_f * cb
    ca, sa = math.cos(arg), math.sin(arg)
    q = 0.5 * Jv * (2 * Jv - 1)
    moments = MomentSet(
        jx=Jv * sb * ca,
        jy=Jv * sb * sa,
        jz=Jv * cb,
        jx2=0.5 * Jv + q * sb**2 * ca**2,
        jy2=0.5 * Jv + q * sb**2 * sa**2,
        jz2=0.5 * Jv + q * cb**2,
        jxjy_sym=q * sb**2 * sa * ca,
        jzjx_sym=q * sb * cb * ca,
        jzjy_sym=q * sb * cb * sa,
        provenance="fringe",
    )
    var_x = 0.5 * Jv * (1.0 - sb**2 * ca**2)
    var_y = 0.5 * Jv * (1.0 - sb**2 * sa**2)
    rate = 2.0 * Jv * cb
    px = make_point(phi_f, "x", -Jv * sb * sa * rate, math.sqrt(var_x), "fringe", tol=1e-12 * Jv)
    py = make_point(phi_f, "y", Jv * sb * ca * rate, math.sqrt(var_y), "fringe", tol=1e-12 * Jv)
    return moments, px, py, fringe_valid(Jv, beta, phi_f)


def fringe_delta_phi_sq(J, beta, phi, axis: str):
    """The closed uniform-fringe expressions for ``delta_phi**2`` (array friendly)."""
    Jv = 0.5 * two_j_of(J)
    cb, sb = clean_trig(beta)
    arg = 2.0 * Jv * np.asarray(phi, dtype=float) * cb
    s2b = (2.0 * sb * cb) ** 2
    if axis == "x":
        num, den = 1.0 - sb**2 * np.cos(arg) ** 2, 2.0 * Jv**3 * s2b * np.sin(arg) ** 2
    else:
        num, den = 1.0 - sb**2 * np.sin(arg) ** 2, 2.0 * Jv**3 * s2b * np.cos(arg) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den == 0, np.inf, num / den)


def _gaussian_factors(J, beta, phi):
    """Gaussian-envelope replacements for z1^(2J-1), z2^(2J-2) and z1^(2J-2),
    with phi folded to the nearest multiple of pi (and the matching sign)."""
    two_j = two_j_of(J)
    Jv = 0.5 * two_j
    cb, sb = clean_trig(beta)
    phi = np.asarray(phi, dtype=float)
    q = np.round(phi / math.pi)
    x = phi - q * math.pi
    parity1 = np.where((q * (two_j - 1)) % 2 == 1, -1.0, 1.0)
    parity1m = np.where((q * (two_j - 2)) % 2 == 1, -1.0, 1.0)
    g1 = np.exp(2j * Jv * x * cb - Jv * x**2 * sb**2)
    g2 = np.exp(4j * Jv * x * cb - 4 * Jv * x**2 * sb**2)
    dg1 = g1 * (2j * Jv * cb - 2 * Jv * x * sb**2)
    return Jv, cb, sb, parity1 * g1, g2, parity1m * g1, parity1 * dg1


def gaussian_envelope_moments(J, beta, phi) -> MomentSet:
    Jv, cb, sb, g1, g2, g1m, _ = _gaussian_factors(J, beta, phi)
    phi = np.asarray(phi, dtype=float)
    jp = Jv * sb * g1
    jp2 = 0.5 * Jv * (2 * Jv - 1) * sb**2 * g2
    sym = Jv + 0.5 * Jv * (2 * Jv - 1) * sb**2
    zc = 0.5 * Jv * (2 * Jv - 1) * sb * (np.cos(phi) * cb + 1j * np.sin(phi)) * g1m
    return MomentSet(
        jx=jp.real,
        jy=jp.imag,
        jz=Jv * cb + np.zeros_like(phi),
        jx2=0.5 * sym + 0.5 * jp2.real,
        jy2=0.5 * sym - 0.5 * jp2.real,
        jz2=Jv**2 * cb**2 + 0.5 * Jv * sb**2 + np.zeros_like(phi),
        jxjy_sym=0.5 * jp2.imag,
        jzjx_sym=zc.real,
        jzjy_sym=zc.imag,
        provenance="gaussian",
    )


def gaussian_valid(J, beta, phi) -> bool:
    x = float(phi) - round(float(phi) / math.pi) * math.pi
    return math.sqrt(J) * abs(x) * abs(math.sin(beta)) < 1.0


def sensitivity_gaussian(J, beta, phi, axis: str) -> SensitivityPoint:
    Jv, cb, sb, g1, g2, _, dg1 = _gaussian_factors(J, beta, phi)
    m = gaussian_envelope_moments(J, beta, phi)
    slope_c = Jv * sb * dg1
    if axis == "x":
        slope, var = slope_c.real, m.var_x
    else:
        slope, var = slope_c.imag, m.var_y
    return make_point(phi, axis, slope, math.sqrt(max(float(var), 0.0)), "gaussian", tol=1e-12 * Jv)


def operating_points(J, beta, axis: str, q_range=(0,), s_range=(0,)) -> list[SensitivityPoint]:
    """Fringe troughs ``q pi + (s + 1/2) pi / (2 J cos beta)`` (x) or
    ``q pi + s pi / (2 J cos beta)`` (y), sorted, with the fringe-model
    sensitivity at each.  Empty when ``cos beta = 0``; use
    :func:`equator_sensitivity` there."""
    Jv = 0.5 * two_j_of(J)
    cb, _ = clean_trig(beta)
    if cb == 0.0:
        return []
    offset = 0.5 if axis == "x" else 0.0
    phis = sorted(
        q * math.pi + (s + offset) * math.pi / (2.0 * Jv * cb) for q in q_range for s in s_range
    )
    out = []
    for phi in phis:
        _, px, py, _ = fringe_model(Jv, beta, phi)
        out.append(px if axis == "x" else py)
    return out


def equator_sensitivity(J, phi) -> SensitivityPoint:
    """J_x readout for the equatorial state (beta = pi/2), small-phi expansion."""
    Jv = 0.5 * two_j_of(J)
    phi = float(phi)
    b = Jv * (2 * Jv - 1)
    var = b * phi**2
    slope = -b * phi
    note = "" if math.sqrt(Jv) * abs(phi) < 1.0 else "phi outside the small-phi regime"
    return make_point(phi, "x", slope, math.sqrt(var), "equator", note=note)


def equator_mean_x(J, phi) -> float:
    Jv = 0.5 * two_j_of(J)
    return Jv - 0.5 * Jv * (2 * Jv - 1) * phi**2


# ---------------------------------------------------------------------------
# dephasing


@dataclass(frozen=True)
class DecoherenceSpec:
    gamma_rate: float
    total_time: float = 1.0

    def __post_init__(self):
        if self.gamma_rate < 0:
            raise ValueError("dephasing rate must be non-negative")

    @property
    def tau2(self) -> float:
        return math.inf if self.gamma_rate == 0 else 1.0 / self.gamma_rate

    @classmethod
    def from_tau2(cls, tau2: float, total_time: float = 1.0) -> "DecoherenceSpec":
        if tau2 <= 0:
            raise ValueError("tau2 must be positive")
        return cls(1.0 / tau2, total_time)


def dephased_moments(mean, var, J, gamma_t):
    """Adjoint-map action of independent dephasing on an equatorial readout:
    mean shrinks by ``e^{-Gt}``, variance relaxes towards ``J/2``."""
    f = math.exp(-gamma_t)
    return f * mean, f * f * var + 0.5 * J * (1.0 - f * f)


def decoherence_factor(J, var0, gamma_t) -> float:
    """``delta_gamma_G / delta_gamma`` for a readout with noise-free variance ``var0``."""
    return math.sqrt(1.0 + J * math.expm1(2.0 * gamma_t) / (2.0 * var0))


def decohered_delta_gamma(J, beta, gamma_rate, t, nu) -> float:
    """Central-fringe J_y sensitivity with dephasing:
    ``e^{Gt} / (t sqrt(nu)) / (sqrt(2) J^{3/2} |sin 2 beta|)``."""
    Jv = 0.5 * two_j_of(J)
    cb, sb = clean_trig(beta)
    s2b = abs(2.0 * sb * cb)
    if s2b == 0.0:
        return NoInformation("sin(2 beta) = 0")
    return math.exp(gamma_rate * t) / (t * math.sqrt(nu)) / (math.sqrt(2.0) * Jv**1.5 * s2b)


def decohered_sensitivity(J, beta, spec: DecoherenceSpec, t: float, nu: float):
    """Returns ``(delta_gamma at t, optimal t, delta_gamma at optimal t with nu = T/t)``.

    The optimum maximizes ``sqrt(t) e^{-Gt}``, i.e. ``t = tau2 / 2``; without
    dephasing there is no finite optimum and the last two entries are ``None``.
    """
    at_t = decohered_delta_gamma(J, beta, spec.gamma_rate, t, nu)
    if spec.gamma_rate == 0:
        return at_t, None, None
    t_opt = 0.5 * spec.tau2
    best = decohered_delta_gamma(J, beta, spec.gamma_rate, t_opt, spec.total_time / t_opt)
    return at_t, t_opt, best


def decohered_sensitivity_general(J, beta, phi, axis, gamma_rate, t, nu=1):
    """``delta_gamma`` with dephasing at any operating point, from the exact
    noise-free moments and the variance-ratio form of the dephasing penalty."""
    p = sensitivity_exact(J, beta, phi, axis)
    if not p.informative:
        return p.delta_phi
    Jv = 0.5 * two_j_of(J)
    base = p.delta_phi / (t * math.sqrt(nu))
    return base * decoherence_factor(Jv, p.noise**2, gamma_rate * t)


def decoherence_scan(J, beta, spec: DecoherenceSpec, ts) -> np.ndarray:
    """``delta_gamma`` over evolution times with the total time fixed (``nu = T/t``)."""
    ts = np.asarray(ts, dtype=float)
    return np.array([decohered_delta_gamma(J, beta, spec.gamma_rate, t, spec.total_time / t) for t in ts])


# ---------------------------------------------------------------------------
# scaling exponents


@dataclass(frozen=True)
class ScalingResult:
    xi: float
    J_lo: float
    J_hi: float
    operating_rule: str
    delta_lo: float
    delta_hi: float


OPERATING_RULES = {
    "phi_zero": lambda J: 0.0,
    "compromise_1_over_sqrt2J": lambda J: 1.0 / (math.sqrt(2.0) * J),
}


def scaling_exponent(beta, axis, J_lo, J_hi, operating_rule=None) -> ScalingResult:
    """Two-point log-slope of ``delta_phi`` against ``J`` (equivalently ``n``)."""
    if operating_rule is None:
        operating_rule = "phi_zero" if axis == "y" else "compromise_1_over_sqrt2J"
    if operating_rule not in OPERATING_RULES:
        raise ValueError(f"unknown operating rule {operating_rule!r}")
    J_lo = 0.5 * two_j_of(J_lo)
    J_hi = 0.5 * two_j_of(J_hi)
    if not J_hi > J_lo:
        raise ValueError("need J_hi > J_lo")
    rule = OPERATING_RULES[operating_rule]
    lo = sensitivity_exact(J_lo, beta, rule(J_lo), axis)
    hi = sensitivity_exact(J_hi, beta, rule(J_hi), axis)
    if not (lo.informative and hi.informative):
        raise ValueError(
            f"no information for axis={axis} at beta={beta!r} ({operating_rule}): zero signal"
        )
    xi = math.log(lo.delta_phi / hi.delta_phi) / math.log(J_hi / J_lo)
    return ScalingResult(xi, J_lo, J_hi, operating_rule, lo.delta_phi, hi.delta_phi)


# ---------------------------------------------------------------------------
# coherent-state model for general k


@dataclass(frozen=True)
class GeneralKModel:
    rotation_rate_multiplier: float
    fringe_width: float
    valid: bool
    moments: MomentSet
    degenerate: bool = False


def general_k_model(J, beta, k: int, phi) -> GeneralKModel:
    """Linearize ``m^k`` about ``J cos beta``: the state stays coherent and
    precesses about z at ``k (J cos beta)^(k-1)`` times the bare rate."""
    if k < 1:
        raise ValueError("k must be >= 1")
    Jv = 0.5 * two_j_of(J)
    cb, sb = clean_trig(beta)
    mult = float(k) * (Jv * cb) ** (k - 1) if k > 1 else 1.0
    degenerate = mult == 0.0
    width = math.inf if degenerate else math.pi / abs(mult)
    if k == 1:
        valid = True  # linear precession is exact
    else:
        valid = abs(Jv * cb) ** (k - 2) * abs(phi) * math.sqrt(Jv) * abs(sb) < 1.0
    psi = float(phi) * mult
    cp, sp = math.cos(psi), math.sin(psi)
    q = 0.5 * Jv * (2 * Jv - 1)
    moments = MomentSet(
        jx=Jv * sb * cp,
        jy=Jv * sb * sp,
        jz=Jv * cb,
        jx2=0.5 * Jv + q * sb**2 * cp**2,
        jy2=0.5 * Jv + q * sb**2 * sp**2,
        jz2=0.5 * Jv + q * cb**2,
        jxjy_sym=q * sb**2 * sp * cp,
        jzjx_sym=q * sb * cb * cp,
        jzjy_sym=q * sb * cb * sp,
        provenance="coherent",
    )
    return GeneralKModel(mult, width, bool(valid), moments, degenerate)
