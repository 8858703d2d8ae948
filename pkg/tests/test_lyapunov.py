import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ctmc_lab import fields
from ctmc_lab.chain import AuditError, Model, ScalarField, StateSet, make_window, window_range
from ctmc_lab.itlog import LogPowerScale
from ctmc_lab.lyapunov import (check_conditional_explosion, check_explosion_modulated, check_explosion_uniform,
                               check_foster, check_implosion, check_implosion_modulated, check_moment_lower,
                               check_moment_upper, check_non_explosion, check_non_implosion, condition_r_report,
                               doubled, dyadic_shells, sublevel_stability)
from ctmc_lab.models import (ParameterError, RateProfile, make_biased_walk, make_lamperti, make_pure_birth,
                             make_pure_death, make_srw_half_line, make_two_ray)
from ctmc_lab.quadrature import Modulator

ONE = RateProfile.constant(1.0)
PI2_6 = 1.64493406684822643647241516665
DEATH2 = make_pure_death(RateProfile.exponential(1.0, 2.0))
SRW_HALF = make_srw_half_line(ONE)
BIRTH2 = make_pure_birth(RateProfile.power(1.0, 2.0))
BIRTH1 = make_pure_birth(RateProfile.power(1.0, 1.0))


# moment bounds

def test_moment_upper_pure_death_certified():
    c = check_moment_upper(DEATH2, fields.affine(1.0, 1.0), 2.0, 1.0, 1.0, window_range(DEATH2, 0, 40))
    assert c.certified and c.granted_bound["q_max"] == 1.0
    a = c.audits[0]
    x = a.states[:, 0].astype(float)
    assert np.array_equal(a.lhs, -(2.0**x) * (2 * x + 1))


def test_moment_upper_srw_refuted():
    c = check_moment_upper(SRW_HALF, fields.identity(), 2.0, 0.5, 0.3, window_range(SRW_HALF, 0, 50))
    assert c.refuted and c.witness["state"] == 1 and c.witness["lhs"] == pytest.approx(1.0)
    assert c.witness_reproduces()


def test_moment_upper_empty_region():
    c = check_moment_upper(SRW_HALF, fields.identity(), 2.0, 1000.0, 1.0, window_range(SRW_HALF, 0, 50))
    assert c.verdict == "window_too_small" and not c.certified


def test_moment_lower_srw_certified():
    f = fields.identity()
    c = check_moment_lower(SRW_HALF, f, f, 1.0, 2.0, 0.5, 1.0, 1.0, 1.0, window_range(SRW_HALF, 0, 200))
    assert c.certified and c.granted_bound["q_min"] == 1.0


def test_moment_lower_pure_death_refuted():
    f = fields.identity()
    c = check_moment_lower(DEATH2, f, f, 1.0, 2.0, 0.5, 1.0, 1.0, 1.0, window_range(DEATH2, 0, 40))
    assert c.refuted and c.witness["condition"] == "g_drift_lower"


def test_moment_lower_f_le_bg_violation():
    c = check_moment_lower(SRW_HALF, fields.affine(2.0), fields.identity(), 1.0, 2.0, 0.5, 1.0, 1.0, 1.0,
                           window_range(SRW_HALF, 0, 20))
    assert c.refuted and c.witness["condition"] == "f_le_bg" and c.witness["state"] == 1


# Foster

def test_foster_biased_walk():
    m = make_biased_walk(0.4, ONE)
    w = window_range(m, 0, 500)
    c = check_foster(m, fields.affine(5.0), [0], 1.0, w)
    assert c.certified
    assert np.allclose(c.audits[0].lhs, -1.0, rtol=0, atol=1e-13)
    assert np.array_equal(c.bound_at(w.states[:4]), [0.0, 5.0, 10.0, 15.0])


def test_foster_srw_refuted_for_any_eps():
    for eps in (1.0, 1e-3, 1e-9):
        c = check_foster(SRW_HALF, fields.identity(), [0], eps, window_range(SRW_HALF, 0, 30))
        assert c.refuted and c.witness["state"] == 1


def test_foster_level_separation():
    m = make_biased_walk(0.4, ONE)
    f = ScalarField(lambda s: np.where(s[:, 0] == 0, 10.0, 5.0 * s[:, 0]), "bump")
    c = check_foster(m, f, [0], 1.0, window_range(m, 0, 30))
    assert c.refuted
    bad = c.violations()["level_separation"][:, 0].tolist()
    assert bad == [1, 2]


def test_foster_empty_F():
    with pytest.raises(ParameterError):
        check_foster(SRW_HALF, fields.identity(), [], 1.0, window_range(SRW_HALF, 0, 5))


# explosion

def test_explosion_uniform_tail_sum():
    c = check_explosion_uniform(BIRTH2, fields.tail_inverse_square(), 1.0, window_range(BIRTH2, 1, 10_000))
    assert c.certified
    assert c.bound_at(np.array([[1]]))[0] == pytest.approx(PI2_6, rel=1e-14)


def test_explosion_uniform_refuted_and_positivity():
    c = check_explosion_uniform(BIRTH2, fields.tail_inverse_square(), 1.5, window_range(BIRTH2, 1, 100))
    assert c.refuted and c.witness["state"] == 1
    with pytest.raises(ParameterError):
        check_explosion_uniform(BIRTH2, fields.identity(), 1.0, window_range(BIRTH2, 1, 10))


def test_explosion_modulated_constant_reduction():
    s = 6 / math.pi**2
    f = fields.tail_inverse_square(s)
    w = window_range(BIRTH2, 1, 5000)
    mod = check_explosion_modulated(BIRTH2, f, Modulator.constant(s), w)
    uni = check_explosion_uniform(BIRTH2, f, s, w)
    assert mod.certified and uni.certified
    assert mod.constants["B_hat"] == pytest.approx(1.0 / s, rel=1e-10)
    assert np.array_equal(mod.audits[1].ok, uni.audits[0].ok)


def test_explosion_modulated_nonintegrable():
    f = fields.tail_inverse_square(6 / math.pi**2)
    c = check_explosion_modulated(BIRTH2, f, Modulator.power(1.0), window_range(BIRTH2, 1, 100))
    assert c.refuted and c.reason == "non-integrable singularity"


def two_ray():
    return make_two_ray(0.8, RateProfile.logtower(1.0, -1, 0, 1.0), ONE)


def test_conditional_explosion_two_ray():
    m = two_ray()
    c = check_conditional_explosion(m, fields.inverse_on_ray(1.0), StateSet.at_most(0), 0.1, 2,
                                    window_range(m, -50, 5000))
    assert c.certified
    assert c.granted_bound["hit_A_upper"] == pytest.approx(0.5)


def test_conditional_explosion_start_not_below():
    m = two_ray()
    c = check_conditional_explosion(m, fields.inverse_on_ray(1.0), StateSet.at_most(0), 0.1, 1,
                                    window_range(m, -50, 500))
    assert c.refuted and c.witness["condition"] == "start_below_A"


def test_conditional_explosion_drift_witness():
    m = two_ray()
    c = check_conditional_explosion(m, fields.inverse_on_ray(1.0), StateSet.at_most(0), 100.0, 2,
                                    window_range(m, -50, 500))
    assert c.refuted and c.witness["condition"] == "drift" and c.witness["state"] == 1


def test_non_explosion_linear_birth():
    c = check_non_explosion(BIRTH1, fields.identity(), Modulator.affine(1, 1), window_range(BIRTH1, 1, 10_000))
    assert c.certified


def test_non_explosion_quadratic_witness():
    c = check_non_explosion(BIRTH2, fields.identity(), Modulator.affine(1, 1), window_range(BIRTH2, 1, 100))
    assert c.refuted and c.witness["state"] == 2


def test_non_explosion_rejects_integrable_tail():
    c = check_non_explosion(BIRTH1, fields.identity(), Modulator.exponential(1.0), window_range(BIRTH1, 1, 50))
    assert c.refuted and c.reason == "modulator rejected: tail of 1/g integrable"


# implosion

def test_implosion_pure_death():
    w = window_range(DEATH2, 0, 40)
    c = check_implosion(DEATH2, fields.one_minus_geometric(2.0), 0.5, 1.0, w)
    assert c.certified and c.granted_bound["uniform_bound"] == 1.0
    assert np.allclose(c.audits[1].lhs, -1.0, rtol=0, atol=1e-12)
    assert any("recurrent" in a for a in c.assumptions)


@pytest.mark.parametrize("eps", [1.0, 0.1, 1e-3, 1e-6])
def test_implosion_unit_rate_refuted(eps):
    m = make_pure_death(ONE)
    c = check_implosion(m, fields.one_minus_geometric(2.0), 0.5, eps, window_range(m, 0, 60))
    assert c.refuted
    assert 2.0 ** -c.witness["state"] < eps


def test_implosion_needs_bounded_field():
    with pytest.raises(ParameterError):
        check_implosion(DEATH2, fields.identity(), 0.5, 1.0, window_range(DEATH2, 0, 10))


def test_non_implosion_log_rate_srw():
    m = make_srw_half_line(RateProfile.custom(lambda r: 1.0 + np.log1p(r), "1+ln(1+x)"))
    c = check_non_implosion(m, fields.identity(), 0.5, 0.1, 2.0, 2.0, window_range(m, 0, 5000))
    assert c.certified


def test_non_implosion_refuted_and_r_guard():
    c = check_non_implosion(DEATH2, fields.identity(), 0.5, 1.0, 10.0, 2.0, window_range(DEATH2, 0, 30))
    assert c.refuted and c.witness["condition"] == "drift_lower"
    with pytest.raises(ParameterError):
        check_non_implosion(DEATH2, fields.identity(), 0.5, 1.0, 1.0, 1.0, window_range(DEATH2, 0, 30))


def test_implosion_modulated_sqrt():
    c = check_implosion_modulated(DEATH2, fields.one_minus_geometric(2.0), Modulator.power(0.5), 0.5,
                                  window_range(DEATH2, 0, 40))
    assert c.certified
    assert c.granted_bound["uniform_bound"] == pytest.approx(2.0, abs=1e-6)


def test_implosion_modulated_constant_reduction():
    f = fields.one_minus_geometric(2.0)
    w = window_range(DEATH2, 0, 40)
    for eps in (1.0, 0.5):
        mod = check_implosion_modulated(DEATH2, f, Modulator.constant(eps), 0.5, w)
        plain = check_implosion(DEATH2, f, 0.5, eps, w)
        assert mod.verdict == plain.verdict
        assert mod.granted_bound["uniform_bound"] == pytest.approx(plain.granted_bound["uniform_bound"], rel=1e-10)


def test_implosion_modulated_nonintegrable():
    c = check_implosion_modulated(DEATH2, fields.one_minus_geometric(2.0), Modulator.power(1.5), 0.5,
                                  window_range(DEATH2, 0, 40))
    assert c.refuted and c.reason == "non-integrable singularity"


# audit mechanics

def test_marginal_states_flagged():
    m = make_biased_walk(0.4, ONE)
    # drift exactly -1 + 5e-11 would pass only thanks to the slack
    f = fields.affine(5.0 * (1 - 5e-11))
    c = check_foster(m, f, [0], 1.0, window_range(m, 0, 20))
    assert c.certified and c.marginal_count > 0


def test_window_not_closed_raises():
    from dataclasses import replace
    # the kernel steps 10 -> 11, which this restricted validity test rejects
    m = replace(SRW_HALF, valid=lambda s: (s[:, 0] >= 0) & (s[:, 0] <= 10))
    w = make_window(m, list(range(0, 11)))
    assert not w.closed
    with pytest.raises(AuditError):
        check_moment_upper(m, fields.identity(), 2.0, 0.5, 1.0, w)


def test_certificate_json_and_replay():
    c = check_implosion(DEATH2, fields.one_minus_geometric(2.0), 0.5, 1.0, window_range(DEATH2, 0, 40))
    d = json.loads(c.to_json())
    assert d["verdict"] == "certified" and d["window"]["digest"] == c.window.digest()
    assert c.replay()
    r = check_foster(SRW_HALF, fields.identity(), [0], 1.0, window_range(SRW_HALF, 0, 20))
    assert json.loads(r.to_json())["witness"]["state"] == 1


def test_sublevel_stability():
    w = [window_range(DEATH2, 0, n) for n in (10, 20, 40)]
    rep = sublevel_stability(DEATH2, fields.one_minus_geometric(2.0), 0.5, w)
    assert rep["counts"] == [2, 2, 2] and rep["stable"]


# condition R

def test_condition_r_linear_scale_is_exact():
    m = make_lamperti(0, 0.25, ONE)
    w = window_range(m, 0, 4000)
    rows = condition_r_report(m, fields.identity(), LogPowerScale(0, 1.0),
                              dyadic_shells(m, fields.identity(), w, range(2, 11)))
    for r in rows:
        assert r["indeterminate"] or r["sup_ratio"] <= 1e-12


def test_condition_r_lamperti_decays():
    m = make_lamperti(0, 0.25, ONE)
    w = window_range(m, 0, 1 << 12)
    # above f ~ 4e3 the exact increment of g o f sinks into cancellation noise
    rows = condition_r_report(m, fields.identity(), LogPowerScale(1, 0.5),
                              dyadic_shells(m, fields.identity(), w, range(3, 11)))
    ratios = [r["sup_ratio"] for r in rows]
    assert all(r is not None for r in ratios)
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] < 0.05 * ratios[0]
    assert all(r["decreased"] for r in rows[1:])


def heavy_jump_model():
    # x -> 2x or x -> x // 2 with equal probability; 0 -> 1
    def kernel(s):
        x = s[:, 0]
        t = np.stack([np.where(x == 0, 1, 2 * x), np.where(x == 0, 1, x // 2)], axis=1)
        p = np.where(x[:, None] == 0, [1.0, 0.0], [0.5, 0.5])
        t = np.where(p > 0, t, x[:, None])
        return t[:, :, None], p
    return Model("heavy", 1, kernel, lambda s: np.ones(s.shape[0]), lambda s: s[:, 0] >= 0)


def test_condition_r_heavy_jumps_do_not_decay():
    m = heavy_jump_model()
    f = fields.identity()
    shells = [np.arange(2**j + 1, 2 ** (j + 1) + 1, 2).reshape(-1, 1) * 2 for j in range(4, 14)]
    rows = condition_r_report(m, f, LogPowerScale(0, 0.5), shells)
    ratios = [r["sup_ratio"] for r in rows]
    # for even x the ratio is the constant |0.5 sqrt2 + 0.5/sqrt2 - 1 - D| / D with D = 3/64
    assert min(ratios) > 0.2
    assert ratios[-1] == pytest.approx(ratios[0], rel=1e-6)


def test_condition_r_zero_D_indeterminate():
    f = fields.identity()
    rows = condition_r_report(make_srw_half_line(ONE), f, LogPowerScale(0, 1.0),
                              [np.arange(5, 10).reshape(-1, 1)])
    assert rows[0]["indeterminate"]


# replay / monotonicity

def test_doubled_window_keeps_witness():
    c = check_non_explosion(BIRTH2, fields.identity(), Modulator.affine(1, 1), window_range(BIRTH2, 1, 50))
    w2 = doubled(BIRTH2, c.window)
    assert len(w2) == 100
    c2 = c.rerun(w2)
    assert c2.refuted and c2.witness == c.witness


@given(p=st.floats(0.05, 0.95), a=st.floats(0.5, 10), eps=st.floats(0.05, 2), n=st.integers(10, 150),
       cut=st.integers(2, 9))
def test_foster_replay_and_window_monotonicity(p, a, eps, n, cut):
    m = make_biased_walk(p, ONE)
    f = fields.affine(a)
    w = window_range(m, 0, n)
    c = check_foster(m, f, [0], eps, w)
    assert c.replay()
    small = check_foster(m, f, [0], eps, window_range(m, 0, max(2, n * cut // 10)))
    big = c.rerun(doubled(m, w))
    # a certificate on a window survives shrinking it; a refutation survives growing it
    if c.certified:
        assert small.certified
    if c.refuted:
        assert big.refuted and big.witness == c.witness and big.witness_reproduces()
    # the drift is a(2p - 1) everywhere off 0, so away from ties the verdict is known
    gap = a * (2 * p - 1) + eps
    if abs(gap) > 1e-9:
        assert c.certified == (gap < 0)


@given(beta=st.floats(0.5, 3.0), b=st.floats(0.2, 3.0), n=st.integers(20, 200))
def test_non_explosion_replay(beta, b, n):
    m = make_pure_birth(RateProfile.power(1.0, beta))
    c = check_non_explosion(m, fields.identity(), Modulator.affine(1.0, b), window_range(m, 1, n))
    assert c.replay()
    if c.refuted:
        assert c.witness_reproduces()
