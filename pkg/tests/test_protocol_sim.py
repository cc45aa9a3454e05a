"""Monte Carlo protocols: small runs, fixed seeds, tolerances from the sampling error."""
import math
import warnings

import numpy as np
import pytest

from kmetro import exact_moments as em
from kmetro import protocol_sim as ps

PI = math.pi


def test_substreams_are_independent_of_order():
    a = ps.substream(5, 3).normal(size=4)
    ps.substream(5, 2).normal(size=100)
    assert np.array_equal(a, ps.substream(5, 3).normal(size=4))
    assert not np.array_equal(a, ps.substream(5, 4).normal(size=4))


def test_half_spin_equator_is_unbiased():
    m = ps.sample_measurement(0.5, PI / 2, 0.0, "y", ps.substream(1, 0), size=100_000)
    assert set(np.unique(m)) <= {-0.5, 0.5}
    assert abs(m.mean()) <= 3 * 0.5 / math.sqrt(m.size)


def test_gaussian_sampling_mean():
    J, beta, phi = 200, PI / 4, 1e-4
    mean, var = ps.readout_moments(J, beta, phi, "y")
    # J sin(beta) r^399 sin(399 theta)
    assert mean == pytest.approx(3.9895, abs=1e-4)
    m = ps.sample_measurement(J, beta, phi, "y", ps.substream(2, 0), size=100_000, mode="gaussian")
    assert abs(m.mean() - mean) <= 3 * math.sqrt(var / m.size)


def test_exact_and_gaussian_sampling_agree():
    J, beta, phi = 100, 0.7, 0.003
    a = ps.sample_measurement(J, beta, phi, "x", ps.substream(3, 0), size=100_000, mode="exact")
    b = ps.sample_measurement(J, beta, phi, "x", ps.substream(3, 1), size=100_000, mode="gaussian")
    se = math.sqrt(a.var() / a.size + b.var() / b.size)
    assert abs(a.mean() - b.mean()) <= 3 * se


def test_sampling_mode_rules():
    with pytest.raises(ValueError):
        ps.sample_measurement(10, 1.0, 0.0, "y", ps.substream(0, 0), mode="exact", gamma_t=0.2)
    with pytest.raises(ValueError):
        ps.sample_measurement(10, 1.0, 0.0, "z", ps.substream(0, 0))
    with pytest.raises(ValueError):
        ps.sample_measurement(10, 1.0, 0.0, "y", ps.substream(0, 0), mode="fast")


def test_clamp_warning_near_pole():
    with pytest.warns(ps.ClampWarning):
        # mean 49.3, sd 0.85: the upper tail is cut at m = J
        ps.sample_measurement(50, 1.4, 0.0, "x", ps.substream(0, 0), size=10, mode="gaussian")


def test_estimator_small_run():
    cfg = ps.TrialConfig(J=50, beta=PI / 4, phi_true=1e-3, nu=2000, seed=4, batches=40)
    out = ps.run_estimation(cfg)
    assert out.sampling_mode == "exact"
    assert out.expected_delta_phi == pytest.approx(
        em.sensitivity_exact(50, PI / 4, 0.0, "y").delta_phi / math.sqrt(2000)
    )
    assert out.empirical_delta_phi == pytest.approx(out.expected_delta_phi, rel=0.35)
    assert abs(out.phi_est - 1e-3) <= 4 * out.expected_delta_phi / math.sqrt(40)
    assert len(out.estimates) == 40


def test_estimator_unbiased_at_zero():
    cfg = ps.TrialConfig(J=200, beta=PI / 4, phi_true=0.0, nu=10_000, seed=9, batches=30, sampling_mode="gaussian")
    out = ps.run_estimation(cfg)
    assert abs(out.phi_est) <= 3 * out.expected_delta_phi / math.sqrt(30)


def test_estimator_rejects_dead_operating_point_and_warns_off_fringe():
    with pytest.raises(ValueError, match="zero slope"):
        ps.run_estimation(ps.TrialConfig(J=20, beta=PI / 2, phi_true=0.0, nu=10, batches=1))
    with pytest.warns(ps.FringeWarning):
        ps.run_estimation(ps.TrialConfig(J=20, beta=PI / 4, phi_true=0.5, nu=10, batches=1))


def test_dephased_readout_moments():
    J, beta, gt = 1e4, PI / 4, 0.5
    mean0, var0 = ps.readout_moments(J, beta, 0.001, "y")
    mean, var = ps.readout_moments(J, beta, 0.001, "y", gamma_t=gt)
    f = math.exp(-gt)
    assert mean == pytest.approx(f * mean0)
    assert var == pytest.approx(f * f * var0 + 0.5 * J * (1 - f * f))


def test_cat_protocol():
    out = ps.cat_protocol(4.0, 0.1, 1.0, 10_000, batches=200, seed=1)
    assert out.expected_delta_gamma == pytest.approx(2.5e-3)
    assert out.empirical_delta_gamma == pytest.approx(2.5e-3, rel=0.2)
    # tan^2 diverges at ||H|| gamma t = pi/2, so the validity check fires
    with pytest.warns(ps.ValidityWarning):
        mid = ps.cat_protocol(4.0, PI / 8, 1.0, 10_000, batches=200, seed=1)
    assert mid.p_plus == pytest.approx(0.5)
    assert mid.empirical_delta_gamma == pytest.approx(2.5e-3, rel=0.2)
    with pytest.warns(ps.ValidityWarning):
        ps.cat_protocol(1.0, 1.4, 1.0, 100, batches=2)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ps.cat_protocol(4.0, 0.1, 1.0, 10_000, batches=2)


def test_feedback_step_sizes():
    assert ps.raw_spin(5, 8, 100) == pytest.approx(2.02471, abs=1e-5)
    assert ps.step_spin(5, 8, 100)[0] == 2.0
    J1, note = ps.step_spin(1, 2, 100)
    assert J1 == 0.5 and "clamped" in note
    assert ps.overhead_factor(8) == pytest.approx(35.54, abs=0.01)


def test_feedback_record():
    rec = ps.adaptive_feedback(ps.FeedbackConfig(seed=7))
    assert len(rec.steps) == 10
    assert rec.N == sum(int(round(2 * s.J)) * 100 for s in rec.steps)
    assert abs(rec.N - rec.N_closed_form) <= rec.rounding_slack
    assert -PI / 4 < rec.phi_true < PI / 4
    assert rec.target == pytest.approx(6.136e-3, abs=1e-6)
    assert rec.success
    assert "no information" in rec.steps[0].note
    again = ps.adaptive_feedback(ps.FeedbackConfig(seed=7))
    assert again.phi_est == rec.phi_est


def test_feedback_config_validation():
    with pytest.raises(ValueError):
        ps.FeedbackConfig(f=1)
    with pytest.raises(ValueError):
        ps.TrialConfig(J=5, beta=1.0, phi_true=0.0, nu=0)
