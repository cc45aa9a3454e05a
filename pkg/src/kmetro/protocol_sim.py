"""Monte Carlo runs of the estimation protocols.

Random streams: every batch (or feedback step, or seed run) draws from its
own ``SeedSequence(seed, spawn_key=(index,))`` stream, so results do not
depend on the order or the degree of parallelism in which batches run.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from kmetro import exact_moments as em
from kmetro import oracle
from kmetro.spin_model import CoherentPreparation, nearest_half_integer, two_j_of

EXACT_SAMPLING_LIMIT_2J = oracle.ROTATION_LIMIT_2J


class FringeWarning(UserWarning):
    """Operating outside the region where the linear estimator is reliable."""


class ClampWarning(UserWarning):
    """Gaussian samples come close enough to ``|m| = J`` that clamping biases them."""


def substream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _resolve_mode(two_j: int, mode: str, gamma_t: float) -> str:
    if mode not in ("exact", "gaussian", "auto"):
        raise ValueError(f"sampling mode must be exact, gaussian or auto, got {mode!r}")
    if mode == "auto":
        return "exact" if two_j <= EXACT_SAMPLING_LIMIT_2J and gamma_t == 0 else "gaussian"
    if mode == "exact" and gamma_t > 0:
        raise ValueError("exact sampling has no dephasing model; use gaussian")
    return mode


def readout_moments(J, beta, phi, axis, gamma_t: float = 0.0):
    """Mean and variance of ``J_axis`` after evolution and (optional) dephasing."""
    m = em.moments_exact(J, beta, phi)
    mean = float(m.jx if axis == "x" else m.jy)
    var = float(em.exact_variance(J, beta, phi, axis))
    if gamma_t > 0:
        mean, var = em.dephased_moments(mean, var, 0.5 * two_j_of(J), gamma_t)
    return mean, var


def sample_measurement(
    J, beta, phi, axis, rng: np.random.Generator, size: int = 1, mode: str = "auto", gamma_t: float = 0.0
) -> np.ndarray:
    """Draw ``size`` outcomes ``m`` of a ``J_axis`` measurement.

    ``exact`` samples the full outcome distribution of the evolved state;
    ``gaussian`` draws normals with the exact mean and variance, rounded to
    the nearest allowed ``m`` and clamped to ``[-J, J]``.
    """
    if axis not in ("x", "y"):
        raise ValueError(f"axis must be x or y, got {axis!r}")
    two_j = two_j_of(J)
    Jv = 0.5 * two_j
    mode = _resolve_mode(two_j, mode, gamma_t)
    if mode == "exact":
        state = oracle.evolve(CoherentPreparation(two_j, float(beta)), phi)
        p = oracle.measurement_distribution(state, axis)
        idx = rng.choice(two_j + 1, size=size, p=p)
        return idx - Jv
    mean, var = readout_moments(Jv, beta, phi, axis, gamma_t)
    sd = math.sqrt(var)
    if Jv - abs(mean) < 5.0 * sd:
        warnings.warn(
            f"Gaussian readout within 5 sigma of |m| = J (mean {mean:.4g}, sd {sd:.4g}); clamping biases it",
            ClampWarning,
            stacklevel=2,
        )
    x = rng.normal(mean, sd, size=size)
    idx = np.clip(np.rint(x + Jv), 0, two_j)
    return idx - Jv


# ---------------------------------------------------------------------------
# scaled-mean estimator


@dataclass(frozen=True)
class TrialConfig:
    J: float
    beta: float
    phi_true: float
    axis: str = "y"
    nu: int = 10_000
    seed: int = 0
    gamma_t_dephasing: float = 0.0
    sampling_mode: str = "auto"
    batches: int = 100
    operating_point: float = 0.0

    def __post_init__(self):
        if self.nu < 1 or self.batches < 1:
            raise ValueError("nu and batches must be >= 1")
        if self.gamma_t_dephasing < 0:
            raise ValueError("gamma t must be non-negative")
        object.__setattr__(self, "J", 0.5 * two_j_of(self.J))


@dataclass(frozen=True)
class TrialOutcome:
    phi_est: float
    empirical_delta_phi: float
    expected_delta_phi: float
    sample_mean: float
    sample_variance: float
    slope_used: float
    batches: int
    sampling_mode: str
    estimates: tuple[float, ...] = field(repr=False, default=())

    @property
    def standard_error(self) -> float:
        """Of ``empirical_delta_phi``, for Gaussian batch errors."""
        return self.empirical_delta_phi / math.sqrt(2.0 * self.batches)


def central_half_width(J, beta) -> float:
    cb = abs(math.cos(beta))
    return math.inf if cb < 1e-15 else math.pi / (4.0 * J * cb)


def run_estimation(config: TrialConfig) -> TrialOutcome:
    """Repeat the ``nu``-shot scaled-mean estimate ``batches`` times.

    ``phi_est = op + (mean - <J_axis>_op) / slope_op``, with both the
    reference mean and the slope multiplied by ``exp(-G t)`` under dephasing.
    """
    c = config
    op = c.operating_point
    slope = float(em.exact_slope(c.J, c.beta, op, c.axis))
    if abs(slope) < 1e-12 * c.J:
        raise ValueError(f"zero slope of <J_{c.axis}> at the operating point phi={op!r}")
    shrink = math.exp(-c.gamma_t_dephasing)
    ref_mean, _ = readout_moments(c.J, c.beta, op, c.axis)
    ref_mean *= shrink
    slope_used = slope * shrink
    if abs(c.phi_true - op) > central_half_width(c.J, c.beta):
        warnings.warn(
            f"phi_true - op = {c.phi_true - op:.4g} is outside the central fringe half-width",
            FringeWarning,
            stacklevel=2,
        )
    mode = _resolve_mode(int(2 * c.J), c.sampling_mode, c.gamma_t_dephasing)
    estimates = np.empty(c.batches)
    total = 0.0
    total_sq = 0.0
    for b in range(c.batches):
        rng = substream(c.seed, b)
        m = sample_measurement(c.J, c.beta, c.phi_true, c.axis, rng, c.nu, mode, c.gamma_t_dephasing)
        mean = float(np.mean(m))
        estimates[b] = op + (mean - ref_mean) / slope_used
        total += float(np.sum(m))
        total_sq += float(np.sum((m - mean) ** 2)) + c.nu * mean * mean
    count = c.nu * c.batches
    pooled_mean = total / count
    pooled_var = total_sq / count - pooled_mean**2
    errors = estimates - c.phi_true
    rms = math.sqrt(float(np.mean(errors**2)))
    expected = decohered_expectation(c) / math.sqrt(c.nu)
    return TrialOutcome(
        phi_est=float(np.mean(estimates)),
        empirical_delta_phi=rms,
        expected_delta_phi=expected,
        sample_mean=pooled_mean,
        sample_variance=pooled_var,
        slope_used=slope_used,
        batches=c.batches,
        sampling_mode=mode,
        estimates=tuple(float(e) for e in estimates),
    )


def decohered_expectation(c: TrialConfig) -> float:
    """Single-shot error-propagation ``delta_phi`` at the operating point, with dephasing."""
    p = em.sensitivity_exact(c.J, c.beta, c.operating_point, c.axis)
    if not p.informative or c.gamma_t_dephasing == 0:
        return p.delta_phi
    return p.delta_phi * em.decoherence_factor(c.J, p.noise**2, c.gamma_t_dephasing)


# ---------------------------------------------------------------------------
# entangled baseline


class ValidityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CatOutcome:
    gamma_est: float
    empirical_delta_gamma: float
    expected_delta_gamma: float
    p_plus: float
    batches: int


def cat_protocol(
    seminorm_H: float, gamma: float, t: float, nu: int, rng=None, batches: int = 1000, seed: int = 0
) -> CatOutcome:
    """Two-outcome readout of the optimal entangled probe.

    Each shot gives +1 with probability ``cos^2(||H|| gamma t / 2)``; the
    estimate is ``arccos(mean) / (||H|| t)``.  ``rng`` (a Generator) if given
    is used for every batch; otherwise batch ``b`` uses the ``(seed, b)`` stream.
    """
    theta = seminorm_H * gamma * t
    tan2 = math.tan(theta) ** 2
    if not nu >= 10.0 * tan2:
        warnings.warn(f"nu = {nu} is not >> tan^2(||H|| gamma t) = {tan2:.4g}", ValidityWarning, stacklevel=2)
    p_plus = math.cos(0.5 * theta) ** 2
    est = np.empty(batches)
    for b in range(batches):
        g = rng if rng is not None else substream(seed, b)
        ups = g.binomial(nu, p_plus)
        mean = (2.0 * ups - nu) / nu
        est[b] = math.acos(min(1.0, max(-1.0, mean))) / (seminorm_H * t)
    rms = math.sqrt(float(np.mean((est - gamma) ** 2)))
    return CatOutcome(float(np.mean(est)), rms, 1.0 / (math.sqrt(nu) * t * seminorm_H), p_plus, batches)


# ---------------------------------------------------------------------------
# adaptive feedback


@dataclass(frozen=True)
class FeedbackConfig:
    f: float = 8.0
    nu: int = 100
    L: int = 10
    phi_true: Optional[float] = None  # None: uniform on (-pi/4, pi/4) from the seed
    seed: int = 0
    beta: float = math.pi / 4

    def __post_init__(self):
        if self.f < 2 or self.L < 1 or self.nu < 1:
            raise ValueError("need f >= 2, L >= 1, nu >= 1")


@dataclass(frozen=True)
class FeedbackStep:
    l: int
    J: float
    delta_phi: float
    estimate: float
    residual: float
    note: str = ""


@dataclass(frozen=True)
class FeedbackRecord:
    steps: tuple[FeedbackStep, ...]
    N: int
    N_closed_form: float
    phi_true: float
    phi_est: float
    target: float

    @property
    def final_error(self) -> float:
        return abs(self.phi_est - self.phi_true)

    @property
    def success(self) -> bool:
        return self.final_error <= self.target

    @property
    def last_step_fraction(self) -> float:
        return 2.0 * self.steps[-1].J * self._nu / self.N

    @property
    def _nu(self) -> float:
        return self.N / sum(2.0 * s.J for s in self.steps)

    @property
    def rounding_slack(self) -> float:
        """Bound on ``|N - N_closed_form|``: half a unit of ``2 J_l`` per step, times nu."""
        return self._nu * len(self.steps)


def raw_spin(l: int, f: float, nu: float) -> float:
    return (f * 2.0**l / math.pi) ** (2.0 / 3.0) / (2.0 * nu ** (1.0 / 3.0))


def step_spin(l: int, f: float, nu: float) -> tuple[float, str]:
    raw = raw_spin(l, f, nu)
    J = nearest_half_integer(raw)
    note = f"raw J {raw:.4g} clamped to 1/2" if raw < 0.25 else ""
    return J, note


def closed_form_N(f: float, nu: float, L: int) -> float:
    a = 2.0 ** (2.0 / 3.0)
    return (2.0 * nu * f / math.pi) ** (2.0 / 3.0) * (a**L - 1.0) / (a - 1.0)


def overhead_factor(f: float) -> float:
    return 2.0 * f / (2.0 ** (2.0 / 3.0) - 1.0) ** 1.5


def adaptive_feedback(config: FeedbackConfig) -> FeedbackRecord:
    """Determine phi bit by bit with J_y readouts at the fringe centre.

    At step ``l`` the residual ``phi - phi_est`` is estimated from ``nu``
    probes of spin ``J_l`` and added to the running estimate.  ``J = 1/2``
    steps carry no information for a quadratic coupling (``J_z^2`` is then a
    multiple of the identity); they are recorded and counted in ``N`` but
    leave the estimate unchanged.
    """
    c = config
    phi_true = c.phi_true
    if phi_true is None:
        phi_true = float(substream(c.seed, 0).uniform(-0.25 * math.pi, 0.25 * math.pi))
    estimate = 0.0
    steps = []
    total = 0
    for l in range(1, c.L + 1):
        J, note = step_spin(l, c.f, c.nu)
        total += int(round(2 * J)) * c.nu
        residual = phi_true - estimate
        point = em.sensitivity_exact(J, c.beta, 0.0, "y")
        if not point.informative:
            note = (note + "; " if note else "") + "no information at this J"
            steps.append(FeedbackStep(l, J, math.inf, estimate, residual, note))
            continue
        if abs(residual) > central_half_width(J, c.beta):
            note = (note + "; " if note else "") + "residual beyond half the central fringe"
        rng = substream(c.seed, l)
        m = sample_measurement(J, c.beta, residual, "y", rng, c.nu)
        estimate += float(np.mean(m)) / point.slope
        steps.append(
            FeedbackStep(l, J, point.delta_phi / math.sqrt(c.nu), estimate, phi_true - estimate, note)
        )
    return FeedbackRecord(
        steps=tuple(steps),
        N=total,
        N_closed_form=closed_form_N(c.f, c.nu, c.L),
        phi_true=phi_true,
        phi_est=estimate,
        target=2.0 * math.pi * 2.0**-c.L,
    )


def feedback_success_rate(f=8.0, nu=100, L=10, seeds=range(100), beta=math.pi / 4) -> tuple[int, int]:
    """``(successes, runs)`` over independent seeds."""
    ok = 0
    seeds = list(seeds)
    for s in seeds:
        ok += adaptive_feedback(FeedbackConfig(f, nu, L, None, s, beta)).success
    return ok, len(seeds)
