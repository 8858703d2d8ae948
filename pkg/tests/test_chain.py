import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ctmc_lab import fields
from ctmc_lab.chain import (AuditError, EncodingError, NumericError, ScalarField, Window, apply_generator,
                            audit_model, embedded_step_distribution, generator, make_window, mean_drift,
                            moment_drift, window_box, window_range)
from ctmc_lab.models import (RateProfile, make_biased_walk, make_lamperti, make_mock_tree, make_pure_birth,
                             make_pure_death, make_quadrant, make_srw, make_srw_half_line, make_two_ray)

SQ = ScalarField(lambda s: s[:, 0].astype(float) ** 2, "x^2")
ONE = RateProfile.constant(1.0)


def zoo():
    q, _ = make_quadrant(0.8, 0.9, -0.2, (0.1, 0.5), (0.4, -0.2), ONE)
    return [
        (make_pure_birth(RateProfile.power(1, 2)), window_range, (1, 300)),
        (make_pure_death(RateProfile.exponential(1, 2)), window_range, (0, 300)),
        (make_biased_walk(0.4, ONE), window_range, (0, 300)),
        (make_srw_half_line(RateProfile.logtower(1, 0, 1, 1)), window_range, (0, 300)),
        (make_lamperti(1, 0.3, RateProfile.power(1, 1)), window_range, (0, 300)),
        (make_srw(1, ONE), window_range, (-150, 150)),
        (make_srw(2, ONE), window_box, ((-10, -10), (10, 10))),
        (make_srw(3, RateProfile.power(1, 1)), window_box, ((-4, -4, -4), (4, 4, 4))),
        (make_two_ray(0.75, RateProfile.logtower(1, -1, 0, 1), ONE), window_range, (-150, 150)),
        (q, window_box, ((0, 0), (20, 20))),
        (make_mock_tree(0.75, lambda n: n ** -2.0, K=lambda n: float(n), n_branch=20), window_box, ((0, 0), (15, 20))),
    ]


def test_pure_birth_step():
    assert embedded_step_distribution(make_pure_birth(ONE), 3) == [(4, 1.0)]


def test_srw_z_step_at_zero():
    assert sorted(embedded_step_distribution(make_srw(1, ONE), 0)) == [(-1, 0.5), (1, 0.5)]


def test_lamperti_step_matches_drift():
    m = make_lamperti(0, 0.25, ONE)
    (y1, p1), (y2, p2) = embedded_step_distribution(m, 7)
    assert (y1, y2) == (8, 6)
    assert p1 == pytest.approx(0.5 + 1 / 56, abs=1e-15)
    assert mean_drift(m, fields.identity(), 7) == pytest.approx(2 * p1 - 1, abs=1e-15)


def test_mean_and_moment_drift_examples():
    srw = make_srw(1, ONE)
    assert mean_drift(srw, SQ, 5) == pytest.approx(1.0)
    assert moment_drift(srw, SQ, 5, 2) == pytest.approx(101.0)
    assert mean_drift(make_pure_death(ONE), fields.identity(), 9) == -1.0
    for rho in (1.0, 1.5, 2.0, 3.0):
        assert moment_drift(make_biased_walk(0.3, ONE), fields.identity(), 4, rho) == pytest.approx(1.0)


def test_generator_examples():
    pb = make_pure_birth(RateProfile.power(1, 2))
    inv = ScalarField(lambda s: 1.0 / s[:, 0], "1/x")
    assert apply_generator(pb, inv, 3) == pytest.approx(-0.75, rel=1e-14)
    tail = fields.tail_inverse_square()
    vals = generator(pb, tail, np.arange(1, 500).reshape(-1, 1))
    assert np.allclose(vals, -1.0, rtol=0, atol=1e-10)


def test_nonfinite_field_names_state():
    bad = ScalarField(lambda s: np.where(s[:, 0] == 4, np.inf, 0.0), "bad")
    with pytest.raises(NumericError) as e:
        mean_drift(make_pure_birth(ONE), bad, 3)
    assert e.value.state == 4


def test_unknown_state_is_encoding_error():
    with pytest.raises(EncodingError):
        embedded_step_distribution(make_pure_birth(ONE), -1)
    with pytest.raises(EncodingError):
        make_quadrant(1, 1, 0, (0, 1), (1, 0), ONE)[0].states((3, -1))


@pytest.mark.parametrize("i", range(11))
def test_zoo_audits_and_constant_kernel(i):
    model, mk, (lo, hi) = zoo()[i]
    w = mk(model, lo, hi)
    a = audit_model(model, w)
    assert a["stochastic"] and a["probabilities_in_range"] and a["nonempty"]
    assert a["rates_positive_finite"] and a["targets_valid"] and a["no_self_loops"]
    assert w.closed
    const = fields.constant(3.7)
    assert np.all(generator(model, const, w.states) == 0.0)


@pytest.mark.parametrize("i", range(11))
def test_encode_decode_round_trip(i):
    model, mk, (lo, hi) = zoo()[i]
    w = mk(model, lo, hi)
    for row in w.states[:: max(1, len(w) // 50)]:
        sid = model.decode(model.encode(row if model.dim > 1 else int(row[0])))
        assert np.array_equal(np.atleast_1d(sid), row)


@given(st.integers(0, 10), st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**31))
def test_generator_linearity(i, a, b, seed):
    model, mk, (lo, hi) = zoo()[i]
    w = mk(model, lo, hi)
    rng = np.random.default_rng(seed)
    s = w.states[rng.choice(len(w), size=min(30, len(w)), replace=False)]
    f = fields.identity() if model.dim == 1 else fields.norm()
    g = ScalarField(lambda x: np.sin(x.sum(axis=1).astype(float)), "sin")
    lhs = generator(model, a * f + b * g, s)
    rhs = a * generator(model, f, s) + b * generator(model, g, s)
    scale = np.abs(a * generator(model, f, s)) + np.abs(b * generator(model, g, s)) + 1e-300
    assert np.all(np.abs(lhs - rhs) <= 1e-9 * scale + 1e-12 * model.rates(s))


def test_determinism_bit_identical():
    model, mk, (lo, hi) = zoo()[9]
    w = mk(model, lo, hi)
    f = fields.norm()
    assert np.array_equal(generator(model, f, w.states), generator(model, f, w.states))


def test_window_duplicates_and_digest():
    m = make_pure_birth(ONE)
    with pytest.raises(ValueError):
        make_window(m, [1, 2, 2])
    assert window_range(m, 1, 10).digest() == window_range(m, 1, 10).digest()
    assert window_range(m, 1, 10).digest() != window_range(m, 1, 11).digest()


def test_closure_flag_truthful():
    # walk on Z restricted by a stricter validity predicate: neighbour -1 of 0 is invalid
    from dataclasses import replace
    m = replace(make_srw(1, ONE), valid=lambda s: s[:, 0] >= 0)
    assert not window_range(m, 0, 5).closed
    assert window_range(m, 1, 5).closed


def test_nonpositive_rate_rejected():
    from dataclasses import replace
    m = replace(make_pure_birth(ONE), rate_fn=lambda s: np.where(s[:, 0] == 2, 0.0, 1.0))
    with pytest.raises(NumericError):
        apply_generator(m, fields.identity(), 2)
