"""Invariants over randomly drawn inputs."""
import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from kmetro import _kernels_py, bounds, kernels, oracle
from kmetro import exact_moments as em
from kmetro.spin_model import QUBIT, CouplingSpec, coherent_amplitudes, nearest_half_integer

two_js = st.integers(min_value=1, max_value=400)
betas = st.floats(min_value=1e-3, max_value=math.pi - 1e-3)
phis = st.floats(min_value=-math.pi, max_value=math.pi)

FAST = settings(max_examples=60, deadline=None)


@FAST
@given(two_j=st.integers(1, 20000), beta=betas)
def test_coherent_state_is_normalized(two_j, beta):
    d = coherent_amplitudes(two_j / 2, beta)
    assert math.fsum(d * d) == np.float64(1.0) or abs(math.fsum(d * d) - 1.0) < 1e-12


@FAST
@given(two_j=two_js, beta=betas, phi=phis)
def test_casimir_and_positive_variance(two_j, beta, phi):
    J = two_j / 2
    m = em.moments_exact(J, beta, phi)
    assert abs(m.jx2 + m.jy2 + m.jz2 - J * (J + 1)) <= 1e-10 * J * (J + 1)
    for axis in ("x", "y"):
        assert em.exact_variance(J, beta, phi, axis) >= -1e-12 * J * J


@FAST
@given(two_j=two_js, beta=betas, phi=st.floats(-1.0, 1.0))
def test_sensitivity_symmetries(two_j, beta, phi):
    J = two_j / 2
    for axis in ("x", "y"):
        a = em.sensitivity_exact(J, beta, phi, axis)
        b = em.sensitivity_exact(J, math.pi - beta, phi, axis)
        if a.informative and abs(a.slope) > 1e-6 * J * J:
            assert math.isclose(a.delta_phi, b.delta_phi, rel_tol=1e-7)


@FAST
@given(two_j=st.integers(1, 24), beta=betas, phi=phis)
def test_closed_form_matches_dense(two_j, beta, phi):
    J = two_j / 2
    state = oracle.evolve(oracle.CoherentPreparation.from_spin(J, beta), phi)
    dense = oracle.collective_moments(state)
    closed = em.moments_exact(J, beta, phi)
    for key in oracle.MOMENT_KEYS:
        ref = getattr(dense, key)
        assert abs(float(getattr(closed, key)) - ref) <= oracle.allowed_error(ref, max(1.0, J))


@FAST
@given(two_j=st.integers(1, 120), beta=st.floats(-2 * math.pi, 2 * math.pi))
def test_wigner_orthogonal_and_backends_agree(two_j, beta):
    d = kernels.wigner_d_matrix(two_j, beta)
    assert np.allclose(d @ d.T, np.eye(two_j + 1), atol=1e-12)
    assert np.allclose(d, _kernels_py.wigner_d_matrix(two_j, beta), rtol=0, atol=1e-13)


@FAST
@given(n=st.integers(1, 12), k=st.integers(1, 4), self_=st.booleans())
def test_qubit_extremes_equal_enumeration(n, k, self_):
    assume(n >= k)
    r = bounds.extreme_eigenvalues(QUBIT, CouplingSpec(k, n, self_))
    ref = oracle.string_extremes(QUBIT, CouplingSpec(k, n, self_))
    assert r.lambda_cap_max == ref.lambda_cap_max
    assert r.lambda_cap_min == ref.lambda_cap_min


@FAST
@given(
    levels=st.lists(st.floats(-2, 2, allow_nan=False).map(lambda v: round(v, 3)), min_size=2, max_size=4, unique=True),
    n=st.integers(1, 8),
    k=st.integers(1, 4),
    self_=st.booleans(),
)
def test_composition_kernels_agree(levels, n, k, self_):
    assume(n >= k)
    levels = tuple(sorted(levels))
    a = kernels.composition_extremes(levels, n, k, self_)
    b = _kernels_py.composition_extremes(levels, n, k, self_)
    assert a[1] == b[1] and a[3] == b[3] and a[4] == b[4]
    assert math.isclose(a[0], b[0], rel_tol=1e-12, abs_tol=1e-12)
    assert a[0] >= a[2]


@FAST
@given(x=st.floats(0, 1e6))
def test_nearest_half_integer(x):
    h = nearest_half_integer(x)
    assert h >= 0.5 and (2 * h) == int(2 * h)
    assume(x >= 0.75)
    assert abs(h - x) <= 0.25 + 1e-9


@FAST
@given(p=st.floats(0.01, 0.99), n=st.integers(1, 60))
def test_linear_product_variance_is_binomial(p, n):
    # k = 1: (Delta H)^2 of n qubits with levels +-1/2 is n p (1 - p)
    v = oracle.product_variance_exact(p, n, 1)
    assert math.isclose(v, n * p * (1 - p), rel_tol=1e-10)
