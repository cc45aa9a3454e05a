"""The compiled and pure-Python kernels must agree; each is also checked
against an independent construction."""
import math

import numpy as np
import pytest

from kmetro import _kernels_py, kernels
from kmetro.oracle import string_extremes
from kmetro.spin_model import CouplingSpec, SingleBodySpectrum, coherent_amplitudes

compiled = pytest.importorskip("kmetro._kernels", reason="extension not built")


@pytest.mark.parametrize("two_j", [1, 2, 7, 40, 301])
@pytest.mark.parametrize("beta", [0.0, 0.4, math.pi / 2, 2.5, math.pi])
def test_wigner_backends_agree(two_j, beta):
    a = compiled.wigner_d_matrix(two_j, beta)
    b = _kernels_py.wigner_d_matrix(two_j, beta)
    # same operation order, but the compiler may contract to FMA
    assert np.allclose(a, b, rtol=0, atol=1e-13)


@pytest.mark.parametrize("levels,n,k,self_", [((-0.5, 0.5), 9, 2, True), ((-0.3, 0.1, 0.7), 10, 3, False),
                                              ((-1.0, -0.2, 0.4, 0.9), 8, 4, True)])
def test_composition_backends_agree(levels, n, k, self_):
    assert compiled.composition_extremes(levels, n, k, self_) == _kernels_py.composition_extremes(levels, n, k, self_)


@pytest.mark.parametrize("two_j", [1, 4, 25, 200])
def test_wigner_top_row_is_coherent_state(two_j):
    beta = 1.234
    d = kernels.wigner_d_matrix(two_j, beta)
    # column m' = J holds <m| exp(-i beta J_y) |J>
    assert np.allclose(d[:, -1], coherent_amplitudes(two_j / 2, beta), rtol=1e-11, atol=1e-15)


@pytest.mark.parametrize("two_j", [3, 60, 512, 2001])
@pytest.mark.parametrize("beta", [0.01, 0.4, 0.5 * math.pi, 2.5, 3.1])
def test_wigner_is_orthogonal(two_j, beta):
    d = kernels.wigner_d_matrix(two_j, beta)
    assert np.allclose(d @ d.T, np.eye(two_j + 1), atol=1e-11)


@pytest.mark.parametrize("two_j", [1, 2, 5, 16])
@pytest.mark.parametrize("beta", [0.3, 1.9, -0.7, math.pi])
def test_wigner_matches_matrix_exponential(two_j, beta):
    from scipy.linalg import expm

    J = two_j / 2
    m = np.arange(two_j + 1) - J
    raise_ = np.diag(np.sqrt((J - m[:-1]) * (J + m[:-1] + 1.0)), -1)
    jy = (raise_ - raise_.T) / 2j
    ref = expm(-1j * beta * jy)
    assert np.abs(ref.imag).max() < 1e-12
    assert np.allclose(kernels.wigner_d_matrix(two_j, beta), ref.real, rtol=0, atol=1e-13)


def test_wigner_edge_columns_at_large_spin():
    two_j, beta = 3001, 0.4
    d = kernels.wigner_d_matrix(two_j, beta)
    amps = coherent_amplitudes(two_j / 2, beta)
    assert np.allclose(d[:, -1], amps, rtol=0, atol=1e-13)
    # column m = -J is the reversed state with alternating signs
    assert np.allclose(d[:, 0], amps[::-1] * (-1.0) ** np.arange(two_j + 1), rtol=0, atol=1e-13)


def test_composition_matches_string_enumeration():
    sp = SingleBodySpectrum((-0.3, 0.1, 0.7))
    for self_ in (True, False):
        vmax, _, vmin, _, count = kernels.composition_extremes(sp.levels, 7, 2, self_)
        ref = string_extremes(sp, CouplingSpec(2, 7, self_))
        assert vmax == pytest.approx(ref.lambda_cap_max, rel=1e-13)
        assert vmin == pytest.approx(ref.lambda_cap_min, rel=1e-13, abs=1e-15)
        assert count == math.comb(7 + 2, 2)
