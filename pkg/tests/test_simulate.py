import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctmc_lab.chain import NumericError, StateSet
from ctmc_lab.estimators import estimate_moment
from ctmc_lab.models import (ParameterError, RateProfile, make_biased_walk, make_lamperti, make_mock_tree,
                             make_pure_birth, make_pure_death, make_two_ray)
from ctmc_lab.rng import stream_keys, uniforms
from ctmc_lab.simulate import (Caps, birth_death_passage_exact, classify_explosion, holding_times,
                               passage_times, sample_passage_time, sample_path, simulate_batch)

ONE = RateProfile.constant(1.0)
ZERO_SET = StateSet.of([0])


def test_uniforms_in_open_interval_and_keyed():
    k = stream_keys(5, np.arange(1000))
    u = uniforms(k, np.zeros(1000, dtype=np.uint64))
    assert np.all((u > 0) & (u < 1))
    assert not np.array_equal(u, uniforms(stream_keys(6, np.arange(1000)), np.zeros(1000, dtype=np.uint64)))


def test_pure_death_three_steps():
    m = make_pure_death(ONE)
    n = 100_000
    b = simulate_batch(m, 3, Caps(target=ZERO_SET), 11, n)
    assert b.fraction("hit") == 1.0 and np.all(b.jumps == 3)
    se = math.sqrt(3.0 / n)
    assert abs(np.mean(b.elapsed) - 3.0) < 3 * se


@given(st.integers(0, 2**32), st.integers(1, 5))
@settings(max_examples=25)
def test_jump_cap_enforced(seed, cap):
    m = make_biased_walk(0.55, ONE)
    b = simulate_batch(m, 2, Caps(max_jumps=cap, target=ZERO_SET), seed, 50)
    assert np.all(b.jumps <= cap)
    assert np.all(b.final_states[:, 0] >= 0)


def test_explosion_signature_in_batch():
    m = make_pure_birth(RateProfile.power(1.0, 2.0))
    b = simulate_batch(m, 1, Caps(max_jumps=2000, max_time=10.0), 3, 10_000)
    assert b.fraction("jump_censored") >= 0.99
    assert np.median(b.holding_tail) < 1e-3


def test_start_in_target_is_zero():
    m = make_pure_death(ONE)
    assert sample_passage_time(m, 0, ZERO_SET, 1, Caps()) == (0.0, False)


def test_rate_overflow_names_state():
    m = make_pure_birth(RateProfile.exponential(1.0, 2.0))
    with pytest.raises(NumericError) as e:
        simulate_batch(m, 990, Caps(max_jumps=50), 1, 3)
    assert e.value.state == 997


def test_determinism_and_worker_invariance():
    m = make_two_ray(0.7, RateProfile.power(1, 1.5), ONE)
    caps = Caps(max_jumps=500, max_time=5.0)
    a = simulate_batch(m, 1, caps, 99, 3000)
    b = simulate_batch(m, 1, caps, 99, 3000)
    c = simulate_batch(m, 1, caps, 99, 3000, workers=3, chunk=700)
    for x, y in ((a, b), (a, c)):
        assert np.array_equal(x.status, y.status) and np.array_equal(x.elapsed, y.elapsed)
        assert np.array_equal(x.final_states, y.final_states) and np.array_equal(x.jumps, y.jumps)


def test_trajectory_depends_only_on_index():
    m = make_biased_walk(0.45, ONE)
    caps = Caps(max_jumps=300, target=ZERO_SET)
    full = simulate_batch(m, 4, caps, 7, 200)
    sub = simulate_batch(m, 4, caps, 7, indices=[17, 150, 3])
    assert np.array_equal(sub.elapsed, full.elapsed[[17, 150, 3]])
    assert sample_path(m, 4, 7, caps) == full.outcome(0)


def test_holding_time_mean():
    m = make_pure_birth(RateProfile.power(1, 1))
    h = holding_times(m, 4, 2, 200_000)
    assert abs(h.mean() - 0.25) < 3 * 0.25 / math.sqrt(len(h))


def test_censoring_soundness():
    m = make_biased_walk(0.5 - 1e-9, ONE)
    b = simulate_batch(m, 5, Caps(max_jumps=200, max_time=30.0, target=ZERO_SET), 4, 5000)
    smp = b.censored_sample()
    assert np.all(smp.values <= 30.0)
    tc = b.mask("time_censored")
    assert np.all(b.elapsed[tc] == 30.0)
    assert np.all(smp.censored == ~b.mask("hit"))
    est, lower = estimate_moment(smp, 1.0)
    assert lower and est <= np.mean(np.where(smp.censored, np.inf, smp.values))


def test_csv_round_trip(tmp_path):
    m = make_mock_tree(0.75, [0.5, 0.5], n_branch=2)
    b = simulate_batch(m, (0, 0), Caps(max_jumps=20), 1, 10)
    p = tmp_path / "t.csv"
    b.to_csv(p)
    rows = list(csv.DictReader(open(p)))
    assert len(rows) == 10 and set(rows[0]) == {"index", "status", "elapsed", "jumps", "final_state", "holding_tail"}
    assert [float(r["elapsed"]) for r in rows] == b.elapsed.tolist()


def test_classifier_quadratic_and_linear():
    q = simulate_batch(make_pure_birth(RateProfile.power(1, 2)), 1, Caps(2000, 100.0), 5, 10_000)
    rq = classify_explosion(q)
    assert rq.p_explode_hat > 0.99 and rq.ci_high >= 0.999
    lin = simulate_batch(make_pure_birth(RateProfile.power(1, 1)), 1, Caps(10_000, 50.0), 5, 2000)
    rl = classify_explosion(lin)
    assert rl.exploded == 0


def test_classifier_empty_and_infinite_cap():
    with pytest.raises(ParameterError):
        classify_explosion([])
    b = simulate_batch(make_pure_death(ONE), 2, Caps(target=ZERO_SET), 1, 5)
    with pytest.raises(ParameterError):
        classify_explosion(b)


def test_exact_sampler_matches_engine():
    # two independent routes to the law of tau_0 for a recurrent Lamperti chain
    m = make_lamperti(0, 0.25, ONE)
    T = 200.0
    ex = birth_death_passage_exact(m, 3, 40_000, 1, T).censored_sample()
    en = passage_times(m, 3, ZERO_SET, Caps(max_time=T), 2, 40_000)
    for q in (0.25, 0.5):
        a, _ = estimate_moment(ex, q)
        b, _ = estimate_moment(en, q)
        se = math.sqrt(np.var(ex.values**q) / len(ex) + np.var(en.values**q) / len(en))
        assert abs(a - b) < 4 * se
    assert abs(ex.censored_mass - en.censored_mass) < 4 * math.sqrt(2 * ex.censored_mass / len(ex))


def test_exact_sampler_biased_mean():
    m = make_biased_walk(0.4, ONE)
    ex = birth_death_passage_exact(m, 4, 100_000, 3, 1e9)
    assert abs(ex.values.mean() - 20.0) < 3 * ex.values.std() / math.sqrt(len(ex.values))
    assert not ex.censored.any()
