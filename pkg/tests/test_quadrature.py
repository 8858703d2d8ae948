import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ctmc_lab.quadrature import (Modulator, finite_on_bounded, integral_inverse_near_zero, is_nondecreasing,
                                 modulator_from_descriptor, tail_diverges)


def test_sqrt_integral_is_two():
    r = integral_inverse_near_zero(Modulator.power(0.5), 1.0)
    assert r.converged
    assert r.value == pytest.approx(2.0, abs=1e-6)


def test_harmonic_singularity_diverges():
    r = integral_inverse_near_zero(Modulator.power(1.0), 1.0)
    assert not r.converged and r.reason == "non-integrable singularity" and math.isinf(r.value)


def test_constant_is_b_over_c():
    r = integral_inverse_near_zero(Modulator.constant(0.25), 3.0)
    assert r.converged and r.value == pytest.approx(12.0, rel=1e-10)


@given(st.floats(0.01, 0.99), st.floats(0.1, 10.0))
def test_power_integral_closed_form(alpha, b):
    # int_0^b y^-alpha dy = b^(1-alpha)/(1-alpha)
    r = integral_inverse_near_zero(Modulator.power(alpha), b)
    assert r.converged
    assert r.value == pytest.approx(b ** (1 - alpha) / (1 - alpha), rel=1e-6)


@given(st.floats(1.0, 3.0))
def test_nonintegrable_powers(alpha):
    assert not integral_inverse_near_zero(Modulator.power(alpha), 1.0).converged


def test_tail_tests():
    assert not tail_diverges(Modulator.affine(1.0, 1.0)).converged
    assert tail_diverges(Modulator.exponential(1.0)).converged
    assert tail_diverges(Modulator.power(2.0)).converged
    assert not tail_diverges(Modulator.power(1.0)).converged


def test_monotonicity_and_local_finiteness():
    assert is_nondecreasing(Modulator.power(0.5), 1e-6, 1.0)
    assert not is_nondecreasing(Modulator(lambda y: 1.0 / y, "inv"), 1e-3, 1.0)
    assert finite_on_bounded(Modulator.affine(1, 1), 100.0)


def test_descriptor_round_trip():
    g = modulator_from_descriptor({"kind": "power", "alpha": 0.5})
    assert g(4.0) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        modulator_from_descriptor({"kind": "bogus"})
