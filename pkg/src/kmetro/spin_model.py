"""Core domain types: single-body spectra, couplings, coherent preparations
and Dicke-basis states, plus the log-space coherent-state amplitudes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def two_j_of(J) -> int:
    """Return the integer ``2J`` for a half-integer spin, rejecting anything else."""
    twice = 2.0 * float(J)
    rounded = int(round(twice))
    if abs(twice - rounded) > 1e-9 or rounded < 1:
        raise ValueError(f"J={J!r} is not a positive half-integer")
    return rounded


def nearest_half_integer(x: float, minimum: float = 0.5) -> float:
    """Round to the nearest multiple of 1/2 (ties away from zero), floored at ``minimum``."""
    doubled = 2.0 * x
    r = math.floor(abs(doubled) + 0.5) * (1 if doubled >= 0 else -1)
    return max(minimum, r / 2.0)


def clean_trig(beta):
    """``(cos beta, sin beta)`` with values within a few ulp of zero snapped to 0.

    The closed forms treat ``beta`` in {0, pi/2, pi} as exact degeneracies;
    without snapping, ``cos(pi/2) = 6e-17`` would leak a spurious signal.
    """
    cb = np.cos(beta)
    sb = np.sin(beta)
    cb = np.where(np.abs(cb) < 1e-15, 0.0, cb)
    sb = np.where(np.abs(sb) < 1e-15, 0.0, sb)
    if np.ndim(cb) == 0:
        return float(cb), float(sb)
    return cb, sb


@dataclass(frozen=True)
class SingleBodySpectrum:
    eigenvalues: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(sorted(float(v) for v in self.eigenvalues))
        if len(set(vals)) < 2:
            raise ValueError("spectrum needs at least two distinct eigenvalues")
        object.__setattr__(self, "eigenvalues", vals)

    @property
    def lambda_max(self) -> float:
        return self.eigenvalues[-1]

    @property
    def lambda_min(self) -> float:
        return self.eigenvalues[0]

    @property
    def seminorm(self) -> float:
        return self.lambda_max - self.lambda_min

    @property
    def mean(self) -> float:
        return 0.5 * (self.lambda_max + self.lambda_min)

    @property
    def levels(self) -> tuple[float, ...]:
        """Distinct eigenvalues, ascending."""
        return tuple(sorted(set(self.eigenvalues)))

    @property
    def is_symmetric(self) -> bool:
        return self.lambda_min == -self.lambda_max


QUBIT = SingleBodySpectrum((-0.5, 0.5))


def spectrum_stats(eigenvalues) -> SingleBodySpectrum:
    return SingleBodySpectrum(tuple(eigenvalues))


@dataclass(frozen=True)
class CouplingSpec:
    k: int
    n: int
    self_interactions: bool = True

    def __post_init__(self):
        if self.k < 1 or self.n < self.k:
            raise ValueError(f"need n >= k >= 1, got n={self.n}, k={self.k}")


@dataclass(frozen=True)
class CoherentPreparation:
    """Product state of ``2J`` identical qubits rotated by ``beta`` about y."""

    two_j: int
    beta: float
    # relative phases per constituent; carried but only zero phases are used
    phases: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.two_j < 1:
            raise ValueError("2J must be >= 1")
        if not math.isfinite(self.beta):
            raise ValueError("beta must be finite")

    @property
    def J(self) -> float:
        return 0.5 * self.two_j

    @classmethod
    def from_spin(cls, J, beta: float) -> "CoherentPreparation":
        return cls(two_j_of(J), float(beta))


@dataclass(frozen=True)
class DickeState:
    """Pure state in the symmetric subspace; ``amplitudes[i]`` is ``c_m`` with ``m = i - J``."""

    two_j: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.two_j + 1,):
            raise ValueError("amplitude vector must have length 2J+1")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state not normalized (norm^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def J(self) -> float:
        return 0.5 * self.two_j

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(self.two_j + 1) - 0.5 * self.two_j


@dataclass(frozen=True)
class ExperimentClock:
    gamma: float
    t: float
    nu: int = 1

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("t must be positive")
        if self.nu < 1:
            raise ValueError("nu must be >= 1")

    @property
    def phi(self) -> float:
        return self.gamma * self.t


_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _stirlerr(n: np.ndarray) -> np.ndarray:
    """``log(n!) - log(sqrt(2 pi n) (n/e)^n)`` for integer ``n >= 1``."""
    from scipy.special import gammaln

    n = np.asarray(n, dtype=float)
    out = np.empty_like(n)
    small = n <= 15
    ns = n[small]
    out[small] = gammaln(ns + 1.0) - (ns + 0.5) * np.log(ns) + ns - _HALF_LOG_2PI
    nl = n[~small]
    nn = nl * nl
    s0, s1, s2, s3, s4 = 1 / 12, 1 / 360, 1 / 1260, 1 / 1680, 1 / 1188
    out[~small] = (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / nl
    return out


def _bd0(x: np.ndarray, mean: float) -> np.ndarray:
    """Deviance term ``x log(x/mean) + mean - x`` without cancellation."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    near = np.abs(x - mean) < 0.1 * (x + mean)
    # series in v = (x - mean)/(x + mean)
    xn = x[near]
    v = (xn - mean) / (xn + mean)
    s = (xn - mean) * v
    ej = 2.0 * xn * v
    vv = v * v
    acc = s.copy()
    for j in range(1, 200):
        ej = ej * vv
        term = ej / (2 * j + 1)
        new = acc + term
        if np.all(new == acc):
            break
        acc = new
    out[near] = acc
    xf = x[~near]
    out[~near] = xf * np.log(xf / mean) + mean - xf
    return out


def log_binomial_pmf(n: int, i: np.ndarray, p: float, q: float) -> np.ndarray:
    """``log[C(n, i) p^i q^(n-i)]`` by the saddle-point (Stirling-error) split.

    Every term stays O(1) near the peak, so the result keeps close to full
    relative precision even for ``n`` in the tens of thousands, unlike the
    plain log-gamma difference whose terms are ~1e4 large.  ``q = 1 - p`` is
    passed separately so that neither is formed by subtraction.
    """
    i = np.asarray(i)
    out = np.full(i.shape, -np.inf)
    if p == 0.0 or q == 0.0:
        out[i == (n if q == 0.0 else 0)] = 0.0
        return out
    # take logs and means through the smaller of p, q: near p = 1 an ulp of
    # p is a relative error of 1e-16 / q in log p, times n in the edge term
    if q < p:
        log_p, log_q, mean_p, mean_q = math.log1p(-q), math.log(q), n - n * q, n * q
    else:
        log_p, log_q, mean_p, mean_q = math.log(p), math.log1p(-p), n * p, n - n * p
    lo = i == 0
    hi = i == n
    out[lo] = n * log_q
    out[hi] = n * log_p
    mid = ~(lo | hi)
    x = i[mid].astype(float)
    lc = (
        _stirlerr(np.array([n]))[0]
        - _stirlerr(x)
        - _stirlerr(n - x)
        - _bd0(x, mean_p)
        - _bd0(n - x, mean_q)
    )
    lf = math.log(2.0 * math.pi) + np.log(x) + np.log1p(-x / n)
    out[mid] = lc - 0.5 * lf
    return out


def coherent_amplitudes(J, beta: float) -> np.ndarray:
    """Amplitudes ``d_m = <J,m| exp(-i beta J_y) |J,J>`` for ``m = -J .. J``.

    ``d_m^2`` is a binomial pmf in ``J + m`` with success probability
    ``cos^2(beta/2)``; it is evaluated in log space and the sign
    ``sign(cos)^(J+m) sign(sin)^(J-m)`` restored afterwards.
    """
    two_j = two_j_of(J)
    i = np.arange(two_j + 1)  # i = J + m
    c = math.cos(0.5 * beta)
    s = math.sin(0.5 * beta)
    turns = beta / math.pi
    # exact zeros at the poles (beta a multiple of pi)
    if turns == round(turns):
        if round(turns) % 2 == 0:
            s = 0.0
        else:
            c = 0.0
    logpmf = log_binomial_pmf(two_j, i, c * c, s * s)
    sign = np.where((c < 0) & (i % 2 == 1), -1.0, 1.0) * np.where(
        (s < 0) & ((two_j - i) % 2 == 1), -1.0, 1.0
    )
    return sign * np.exp(0.5 * logpmf)
