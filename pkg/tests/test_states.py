import math

import numpy as np
import pytest

import oracles
from bqpt.states import (
    PRESETS,
    PrepDistribution,
    PreparedPair,
    QubitParams,
    analytic_moments,
    product_state,
    product_states,
    sample_ensemble,
    sample_pair,
)


def test_qubit_params_validation():
    QubitParams(r=0.0, theta=0.0, phi=0.0)
    QubitParams(r=1.0, theta=1.0, phi=2.0)
    with pytest.raises(ValueError):
        QubitParams(r=1.0001, theta=0.0, phi=0.0)
    with pytest.raises(ValueError):
        QubitParams(r=-0.1, theta=0.0, phi=0.0)


def test_q_is_derived():
    q = QubitParams(r=0.6, theta=0.0, phi=0.0)
    assert q.q == pytest.approx(0.8, rel=1e-15)
    assert abs(q.alpha) ** 2 + abs(q.beta) ** 2 == pytest.approx(1.0, abs=1e-15)


def test_relative_phase():
    pair = PreparedPair(
        QubitParams(0.5, theta=0.2, phi=0.9), QubitParams(0.5, theta=0.1, phi=1.5)
    )
    assert pair.delta_i() == pytest.approx((1.5 - 0.1) - (0.9 - 0.2), rel=1e-15)


def test_product_state_basis_cases():
    up_up = PreparedPair(QubitParams(1, 0, 0), QubitParams(1, 0, 0))
    assert np.allclose(product_state(up_up), [1, 0, 0, 0], atol=1e-15)
    up_down = PreparedPair(QubitParams(1, 0, 0), QubitParams(0, 0, 0))
    assert np.allclose(product_state(up_down), [0, 1, 0, 0], atol=1e-15)


def test_product_state_amplitude():
    pair = PreparedPair(QubitParams(0.3, 0.0, 0.5), QubitParams(0.7, 0.0, 1.0))
    c = product_state(pair)
    assert abs(c[0]) ** 2 == pytest.approx(0.09 * 0.49, abs=1e-14)
    assert np.linalg.norm(c) == pytest.approx(1.0, abs=1e-12)


def test_product_states_matches_scalar_path():
    ens = sample_ensemble(PRESETS["step1"], 99, 0, 50)
    batch = product_states(ens)
    for n in range(50):
        assert np.allclose(batch[:, n], product_state(ens.pair(n)), atol=1e-15)
    norms = np.linalg.norm(batch, axis=0)
    assert np.max(np.abs(norms - 1.0)) < 1e-12


def test_distribution_validation():
    with pytest.raises(ValueError):
        PrepDistribution(r1=(0.5, 1.2), r2=(0.0, 1.0))
    with pytest.raises(ValueError):
        PrepDistribution(r1=(0.4, 0.1), r2=(0.0, 1.0))
    with pytest.raises(ValueError):
        PrepDistribution(r1=(0.0, 0.5), r2=(0.0, 0.5), phi1=(2.0, 1.0))


def test_preset_definitions():
    s1 = PRESETS["step1"]
    assert s1.r1 == (0.1, 0.4) and s1.r2 == (0.6, 0.9)
    assert s1.theta1 == 0.0 and s1.theta2 == 0.0
    assert s1.phi1 == (0.0, 2 * math.pi) and s1.phi2 == (0.0, 2 * math.pi)
    s2 = PRESETS["step2"]
    assert s2.r1 == (0.1, 0.4) and s2.r2 == (0.6, 0.9)
    assert s2.phi1 == 0.0 and s2.phi2 == (0.0, math.pi)
    for name, lo, hi in (("w_eq1", 0.1, 0.4), ("w_eq2", 0.6, 0.9)):
        w = PRESETS[name]
        assert w.r1 == (lo, hi) and w.r2 == (lo, hi)
        assert w.phi1 == (-math.pi / 2, math.pi / 2)
        assert w.phi2 == (-math.pi / 2, math.pi / 2)


def test_sample_pair_respects_ranges():
    gen = np.random.default_rng(0)
    for _ in range(200):
        pair = sample_pair(PRESETS["step2"], gen)
        assert 0.1 <= pair.q1.r < 0.4
        assert 0.6 <= pair.q2.r < 0.9
        assert pair.q1.phi == 0.0
        assert 0.0 <= pair.q2.phi < math.pi
        assert pair.q1.theta == 0.0 and pair.q2.theta == 0.0


def test_modulus_ordering_constraint_for_v_presets():
    # every sampled pair keeps r1 below 1/2 and r2 above it
    for name in ("step1", "step2"):
        ens = sample_ensemble(PRESETS[name], 5, 0, 20_000)
        assert np.all((ens.r1 > 0) & (ens.r1 < 0.5))
        assert np.all((ens.r2 > 0.5) & (ens.r2 < 1))


def test_w_presets_do_not_enforce_ordering():
    ens = sample_ensemble(PRESETS["w_eq2"], 5, 0, 1000)
    assert np.all(ens.r1 > 0.5)  # both moduli live in the same upper range


def test_ensemble_prefix_stability():
    small = sample_ensemble(PRESETS["step1"], 17, 3, 100)
    large = sample_ensemble(PRESETS["step1"], 17, 3, 100_000)
    for name in ("r1", "r2", "phi1", "phi2"):
        assert np.array_equal(getattr(small, name), getattr(large, name)[:100])


def test_ensembles_differ_across_series():
    a = sample_ensemble(PRESETS["step1"], 17, 0, 100)
    b = sample_ensemble(PRESETS["step1"], 17, 1, 100)
    assert not np.array_equal(a.r1, b.r1)


def test_analytic_moments_unit_interval():
    dist = PrepDistribution(r1=(0.0, 1.0), r2=(0.0, 1.0))
    m = analytic_moments(dist)
    assert m.e_r2_1 == pytest.approx(1.0 / 3.0, rel=1e-15)
    assert m.e_r2_2 == pytest.approx(1.0 / 3.0, rel=1e-15)


def test_analytic_moments_symmetric_phase_window():
    dist = PrepDistribution(
        r1=(0.1, 0.4),
        r2=(0.1, 0.4),
        phi1=(-math.pi / 2, math.pi / 2),
        phi2=(-math.pi / 2, math.pi / 2),
    )
    m = analytic_moments(dist)
    assert m.e_cos_phi_theta == pytest.approx(2.0 / math.pi, rel=1e-14)
    assert m.e_sin_delta_i == 0.0
    assert m.sign_e_sin_delta_i == 0
    assert m.symmetric()


def test_analytic_moments_reference_values():
    m = analytic_moments(PRESETS["step1"])
    assert m.e_r2_1 == pytest.approx(0.07, abs=1e-15)
    assert m.e_r2_2 == pytest.approx(0.57, abs=1e-15)
    assert m.e_rq_1 == pytest.approx(oracles.GOLDEN["e_rq_low"], rel=1e-14)
    assert m.e_rq_2 == pytest.approx(oracles.GOLDEN["e_rq_high"], rel=1e-14)
    assert m.e_sin_delta_i == 0.0 and m.sign_e_sin_delta_i == 0
    # the sign preset has a positive mean relative-phase sine, 2/pi
    m2 = analytic_moments(PRESETS["step2"])
    assert m2.sign_e_sin_delta_i == 1
    assert m2.e_sin_delta_i == pytest.approx(2.0 / math.pi, rel=1e-14)
    assert not m2.symmetric()


def test_analytic_moments_match_quadrature_oracle():
    for interval in ((0.1, 0.4), (0.6, 0.9)):
        dist = PrepDistribution(r1=interval, r2=interval)
        m = analytic_moments(dist)
        e_r2, e_rq = oracles.mp_uniform_r_moments(*interval)
        assert m.e_r2_1 == pytest.approx(e_r2, rel=1e-13)
        assert m.e_rq_1 == pytest.approx(e_rq, rel=1e-13)
    e_cos, e_sin = oracles.mp_uniform_trig_moments(-math.pi / 2, math.pi / 2)
    m = analytic_moments(PRESETS["w_eq1"])
    assert m.e_cos_phi_theta == pytest.approx(e_cos, rel=1e-13)
    assert abs(e_sin) < 1e-15


def test_analytic_moments_rejects_foreign_types():
    with pytest.raises(TypeError):
        analytic_moments({"r1": (0.0, 1.0)})


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_sampled_moments_converge_to_analytic(name):
    dist = PRESETS[name]
    m = analytic_moments(dist)
    ens = sample_ensemble(dist, 2024, 0, 1_000_000)
    q1 = np.sqrt(1 - ens.r1**2)
    q2 = np.sqrt(1 - ens.r2**2)
    assert np.mean(ens.r1**2) == pytest.approx(m.e_r2_1, abs=5e-3)
    assert np.mean(ens.r2**2) == pytest.approx(m.e_r2_2, abs=5e-3)
    assert np.mean(ens.r1 * q1) == pytest.approx(m.e_rq_1, abs=5e-3)
    assert np.mean(ens.r2 * q2) == pytest.approx(m.e_rq_2, abs=5e-3)
    assert np.mean(np.sin(ens.delta_i())) == pytest.approx(m.e_sin_delta_i, abs=5e-3)
    if m.e_cos_phi_theta is not None:
        assert np.mean(np.cos(ens.phi1 - ens.theta1)) == pytest.approx(
            m.e_cos_phi_theta, abs=5e-3
        )


def test_parameter_independence():
    ens = sample_ensemble(PRESETS["step1"], 31, 0, 1_000_000)
    columns = [
        ens.r1,
        ens.r2,
        ens.phi1 - ens.theta1,
        ens.phi2 - ens.theta2,
    ]
    corr = np.corrcoef(np.stack(columns))
    off_diag = corr[~np.eye(4, dtype=bool)]
    assert np.max(np.abs(off_diag)) < 5e-3


def test_symmetric_preset_has_zero_mean_relative_phase_sine():
    ens = sample_ensemble(PRESETS["step1"], 57, 2, 1_000_000)
    assert abs(np.mean(np.sin(ens.delta_i()))) < 5e-3
