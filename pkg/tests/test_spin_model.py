import math

import numpy as np
import pytest

from kmetro.spin_model import (
    QUBIT,
    CoherentPreparation,
    CouplingSpec,
    DickeState,
    ExperimentClock,
    SingleBodySpectrum,
    coherent_amplitudes,
    log_binomial_pmf,
    nearest_half_integer,
    spectrum_stats,
    two_j_of,
)


def test_amplitudes_half_spin_equator():
    d = coherent_amplitudes(0.5, math.pi / 2)
    assert d == pytest.approx([0.70710678118654752, 0.70710678118654752], rel=1e-14)


def test_amplitudes_spin_one():
    # index runs m = -J .. J
    d = coherent_amplitudes(1, math.pi / 3)
    assert d[::-1] == pytest.approx([0.75, 0.6123724356957945, 0.25], rel=1e-13)


@pytest.mark.parametrize("beta", np.linspace(-1.0, 7.0, 50))
def test_normalization_large_spin(beta):
    for J in (50, 1e4):
        d = coherent_amplitudes(J, beta)
        assert abs(np.sum(d**2) - 1.0) < 1e-12


@pytest.mark.parametrize("beta", [0.0, math.pi, 2 * math.pi, -math.pi])
def test_poles_are_exact(beta):
    d = coherent_amplitudes(3, beta)
    assert np.count_nonzero(d) == 1
    assert abs(d).max() == 1.0


def test_log_space_matches_direct_evaluation():
    for J in (0.5, 7, 40, 100):
        two_j = int(2 * J)
        for beta in (0.3, 1.1, 2.9):
            c, s = math.cos(beta / 2), math.sin(beta / 2)
            direct = np.array(
                [math.sqrt(math.comb(two_j, i)) * c**i * s ** (two_j - i) for i in range(two_j + 1)]
            )
            got = coherent_amplitudes(J, beta)
            big = np.abs(direct) > 1e-200
            assert np.allclose(got[big], direct[big], rtol=1e-12, atol=0)


def test_reflection_symmetry():
    for beta in (0.2, 0.9, 1.4):
        a = coherent_amplitudes(20, beta)
        b = coherent_amplitudes(20, math.pi - beta)
        assert np.allclose(a, b[::-1], rtol=1e-12, atol=1e-300)


def test_binomial_pmf_sums_to_one_at_large_n():
    n = 20_000
    lp = log_binomial_pmf(n, np.arange(n + 1), 0.3, 0.7)
    assert abs(math.fsum(np.exp(lp)) - 1.0) < 1e-13


def test_spectrum_stats():
    s = spectrum_stats([0.5, -0.5])
    assert (s.seminorm, s.mean) == (1.0, 0.0)
    s = spectrum_stats([0, 1])
    assert (s.seminorm, s.mean) == (1.0, 0.5)
    s = spectrum_stats([-0.3, 0.1, 0.7])
    assert (s.lambda_max, s.lambda_min) == (0.7, -0.3)
    assert s.seminorm == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        spectrum_stats([0.2, 0.2])


def test_type_invariants():
    with pytest.raises(ValueError):
        CouplingSpec(k=3, n=2)
    with pytest.raises(ValueError):
        CoherentPreparation(0, 0.1)
    with pytest.raises(ValueError):
        CoherentPreparation(2, float("nan"))
    with pytest.raises(ValueError):
        DickeState(1, np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        ExperimentClock(gamma=1.0, t=0.0)
    assert ExperimentClock(gamma=0.2, t=3.0).phi == pytest.approx(0.6)
    assert QUBIT.is_symmetric


def test_half_integer_handling():
    assert two_j_of(2.5) == 5
    with pytest.raises(ValueError):
        two_j_of(0.3)
    assert nearest_half_integer(2.0246) == 2.0
    assert nearest_half_integer(0.1) == 0.5
    assert nearest_half_integer(1.25) == 1.5
