"""Closed-form moments, sensitivities and the approximate models."""
import math

import numpy as np
import pytest

from kmetro import exact_moments as em
from kmetro.exact_moments import NoInformation, is_informative

PI = math.pi


def test_single_qubit_is_frozen():
    for beta in (0.3, 1.1, 2.7):
        for phi in (0.0, 0.4, -2.0):
            m = em.moments_exact(0.5, beta, phi)
            assert m.jx == pytest.approx(0.5 * math.sin(beta), abs=1e-15)
            assert m.jy == pytest.approx(0.0, abs=1e-15)


def test_spin_one_at_equator():
    m = em.moments_exact(1, PI / 2, PI / 4)
    assert m.jx == pytest.approx(0.70710678, abs=1e-8)
    assert m.jy == pytest.approx(0.0, abs=1e-14)
    assert m.jx2 == pytest.approx(1.0, abs=1e-14)
    assert m.jy2 == pytest.approx(0.5, abs=1e-14)
    assert m.jz2 == pytest.approx(0.5, abs=1e-14)


def test_unevolved_state():
    m = em.moments_exact(200, PI / 4, 0.0)
    assert m.jx == pytest.approx(141.42136, abs=1e-5)
    assert m.jy == 0.0


@pytest.mark.parametrize("J,beta,phi", [(3, 0.7, 0.2), (12.5, 2.1, -0.35), (25, PI / 4, 0.01), (400, 1.0, 1.3)])
def test_casimir(J, beta, phi):
    m = em.moments_exact(J, beta, phi)
    assert m.jx2 + m.jy2 + m.jz2 == pytest.approx(J * (J + 1), rel=1e-12)


def test_figure_one_numbers():
    p = em.sensitivity_exact(200, PI / 4, 0.0, "y")
    assert p.delta_phi == pytest.approx(math.sqrt(2) / (math.sqrt(200) * 399), rel=1e-12)
    assert p.delta_phi == pytest.approx(2.5063e-4, abs=1e-8)
    crest = em.sensitivity_exact(200, PI / 4, 0.0, "x")
    assert not crest.informative
    assert crest.as_dict()["delta_phi"] == "no-information"


def test_no_information_value():
    v = NoInformation("zero slope")
    assert math.isinf(v) and not is_informative(v)
    assert "zero slope" in repr(v)
    assert is_informative(1.0)


def test_y_readout_at_equator_has_no_information():
    assert not em.sensitivity_exact(50, PI / 2, 0.01, "y").informative


def test_bad_axis():
    with pytest.raises(ValueError):
        em.sensitivity_exact(5, 1.0, 0.1, "z")


@pytest.mark.parametrize("axis", ["x", "y"])
def test_period_pi_and_reflection(axis):
    J, beta, phi = 37.5, 0.9, 0.013
    a = em.sensitivity_exact(J, beta, phi, axis).delta_phi
    assert em.sensitivity_exact(J, beta, phi + PI, axis).delta_phi == pytest.approx(a, rel=1e-9)
    assert em.sensitivity_exact(J, PI - beta, phi, axis).delta_phi == pytest.approx(a, rel=1e-9)


def test_exact_slope_matches_finite_difference():
    J, beta, phi, h = 40, 0.8, 0.021, 1e-6
    for axis, key in (("x", "jx"), ("y", "jy")):
        up = getattr(em.moments_exact(J, beta, phi + h), key)
        dn = getattr(em.moments_exact(J, beta, phi - h), key)
        assert em.exact_slope(J, beta, phi, axis) == pytest.approx((up - dn) / (2 * h), rel=1e-6)


def test_scan_agrees_with_points_and_marks_dead_points():
    phis = np.array([0.0, 1e-3, 2e-3])
    scan = em.sensitivity_scan(200, PI / 4, phis, "x")
    assert math.isinf(scan[0])
    for phi, v in zip(phis[1:], scan[1:]):
        assert v == pytest.approx(em.sensitivity_exact(200, PI / 4, phi, "x").delta_phi, rel=1e-12)


def test_fringe_model_trough():
    J, beta = 2500, PI / 4
    spacing = PI / (2 * J * math.cos(beta))
    # 1.7772e-3 is two trough spacings out (s = 2); s = 1 sits at 8.886e-4
    assert 2 * spacing == pytest.approx(1.7772e-3, abs=1e-7)
    for s in (1, 2, -3):
        _, px, py, valid = em.fringe_model(J, beta, s * spacing)
        assert py.delta_phi == pytest.approx(1 / (math.sqrt(2) * J**1.5), rel=1e-9)
        assert py.delta_phi == pytest.approx(5.6569e-6, abs=1e-9)
        assert valid


def test_fringe_model_centre_and_reflection():
    _, px, py, _ = em.fringe_model(100, PI / 4, 0.0)
    assert py.delta_phi == pytest.approx(1 / (math.sqrt(2) * 100**1.5), rel=1e-12)
    assert not px.informative
    for phi in (0.002, 0.0071):
        a = em.fringe_model(100, PI / 4, phi)
        b = em.fringe_model(100, 3 * PI / 4, phi)
        assert a[1].delta_phi == pytest.approx(b[1].delta_phi, rel=1e-12)
        assert a[2].delta_phi == pytest.approx(b[2].delta_phi, rel=1e-12)


def test_fringe_closed_form_agrees_with_points():
    J, beta, phi = 300, 0.6, 0.0017
    _, px, py, _ = em.fringe_model(J, beta, phi)
    assert math.sqrt(em.fringe_delta_phi_sq(J, beta, phi, "x")) == pytest.approx(px.delta_phi, rel=1e-12)
    assert math.sqrt(em.fringe_delta_phi_sq(J, beta, phi, "y")) == pytest.approx(py.delta_phi, rel=1e-12)


def test_gaussian_envelope():
    J, beta = 2500, PI / 4
    g0 = em.gaussian_envelope_moments(J, beta, 0.0)
    e0 = em.moments_exact(J, beta, 0.0)
    for k in ("jx", "jy", "jz", "jx2", "jy2", "jz2", "jxjy_sym", "jzjx_sym", "jzjy_sym"):
        assert float(getattr(g0, k)) == pytest.approx(float(getattr(e0, k)), rel=1e-12, abs=1e-9)
    g = em.gaussian_envelope_moments(J, beta, 0.02)
    expected = J * math.sin(beta) * math.exp(-0.5)
    assert abs(complex(g.jx, g.jy)) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(1072.2048, abs=1e-4)


def test_gaussian_envelope_tracks_exact_in_regime():
    J, beta = 2500, PI / 4
    edge = 0.5 / (math.sqrt(J) * math.sin(beta))
    for phi in np.linspace(-edge, edge, 41):
        g = em.gaussian_envelope_moments(J, beta, phi)
        e = em.moments_exact(J, beta, phi)
        assert abs(complex(g.jx, g.jy)) == pytest.approx(abs(complex(e.jx, e.jy)), rel=0.01)


def test_operating_points():
    (p,) = em.operating_points(200, PI / 4, "y")
    assert p.phi == 0.0
    (p,) = em.operating_points(200, PI / 4, "x")
    assert p.phi == pytest.approx(5.5536e-3, abs=1e-7)
    lo, hi = em.operating_points(200, PI / 4, "x", s_range=(-1, 0))
    assert lo.phi == pytest.approx(-hi.phi)
    assert em.operating_points(200, PI / 2, "x") == []


def test_equator_branch():
    p = em.equator_sensitivity(200, 0.001)
    assert p.delta_phi == pytest.approx(3.5399e-3, abs=1e-7)
    assert em.equator_mean_x(200, 0.001) == pytest.approx(199.9601, abs=1e-4)
    big = 1e6
    assert em.equator_sensitivity(big, 0.1 / big).delta_phi * big == pytest.approx(1 / math.sqrt(2), rel=1e-5)


def test_decoherence():
    J, beta = 1e4, PI / 4
    clean = em.decohered_delta_gamma(J, beta, 0.0, 1.0, 1)
    assert clean == pytest.approx(1 / (math.sqrt(2) * J**1.5), rel=1e-12)
    at_t, t_opt, best = em.decohered_sensitivity(J, beta, em.DecoherenceSpec.from_tau2(1.0, 100.0), 1.0, 1)
    assert t_opt == 0.5
    assert best == pytest.approx(math.sqrt(math.e / 100) / 1e6, rel=1e-12)
    assert best == pytest.approx(1.64872e-7, abs=1e-12)
    assert em.decohered_sensitivity(J, beta, em.DecoherenceSpec(0.0), 1.0, 1)[1:] == (None, None)
    base = em.decohered_sensitivity_general(J, beta, 0.0, "y", 0.0, 1.0)
    for gt in (0.1, 0.5, 2.0):
        ratio = em.decohered_delta_gamma(J, beta, gt, 1.0, 1) / clean
        assert ratio == pytest.approx(math.exp(gt), rel=1e-12)
        general = em.decohered_sensitivity_general(J, beta, 0.0, "y", gt, 1.0)
        assert general / base == pytest.approx(math.exp(gt), rel=1e-9)


def test_decoherence_scan_minimum():
    spec = em.DecoherenceSpec.from_tau2(1.0, 100.0)
    ts = np.arange(1, 41) * 0.05
    vals = em.decoherence_scan(1e4, PI / 4, spec, ts)
    assert ts[np.argmin(vals)] == pytest.approx(0.5)


def test_scaling_exponents():
    y = em.scaling_exponent(PI / 4, "y", 1e5, 1e7)
    assert y.xi == pytest.approx(1.5, abs=0.02)
    x = em.scaling_exponent(PI / 2, "x", 1e5, 1e7)
    assert x.xi == pytest.approx(1.0, abs=0.05)
    with pytest.raises(ValueError, match="no information"):
        em.scaling_exponent(0.0, "y", 1e5, 1e7)


def test_general_k_model():
    m = em.general_k_model(100, PI / 4, 3, 0.0)
    assert m.rotation_rate_multiplier == pytest.approx(15000.0, rel=1e-12)
    assert m.fringe_width == pytest.approx(2.0944e-4, abs=1e-8)
    two = em.general_k_model(100, PI / 4, 2, 0.0)
    assert two.rotation_rate_multiplier == pytest.approx(2 * 100 * math.cos(PI / 4))
    one = em.general_k_model(100, PI / 4, 1, 0.3)
    assert one.rotation_rate_multiplier == 1.0 and one.fringe_width == pytest.approx(PI)
    flat = em.general_k_model(100, PI / 2, 2, 0.0)
    assert flat.degenerate and math.isinf(flat.fringe_width)


def test_general_k_model_reproduces_fringe_moments():
    J, beta, phi = 150, 0.7, 0.003
    a = em.general_k_model(J, beta, 2, phi).moments
    b, _, _, _ = em.fringe_model(J, beta, phi)
    assert a.jx == pytest.approx(b.jx, rel=1e-12)
    assert a.jy == pytest.approx(b.jy, rel=1e-12)
