import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ctmc_lab.itlog import DomainError, LogPowerScale, domain_threshold, iterated_exp, iterated_log, log_product

# frozen with mpmath at 30 digits
L1_EE = 41.1935556747161235631882876844


def test_level_zero_is_identity():
    assert iterated_log(0, 5.0) == 5.0
    assert log_product(0, 17.3) == 17.3


def test_ln1_and_L1_at_e_to_e():
    s = math.e**math.e
    assert iterated_log(1, s) == pytest.approx(math.e, rel=1e-14)
    assert log_product(1, s) == pytest.approx(L1_EE, rel=1e-13)


def test_negative_level_product_is_one():
    assert log_product(-1, 3.0) == 1.0
    assert np.all(log_product(-1, np.array([1.0, 100.0])) == 1.0)


def test_domain_guard_names_threshold():
    with pytest.raises(DomainError, match="exp_\\(2\\)"):
        iterated_log(2, 10.0)
    with pytest.raises(DomainError):
        log_product(1, 2.0)


@given(st.integers(0, 2), st.floats(2.0, 700.0))
def test_round_trip(k, s):
    x = iterated_exp(k, s)
    if not math.isfinite(x):
        return
    assert iterated_log(k, x) == pytest.approx(s, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_log_product_increasing(k):
    s0 = domain_threshold(k)
    grid = np.geomspace(s0 * (1 + 1e-9), s0 * 1e6, 2000)
    vals = log_product(k, grid)
    assert np.all(vals > 0)
    assert np.all(np.diff(vals) > 0)


@given(st.integers(0, 2), st.floats(-2.0, 3.0).filter(lambda e: abs(e) > 1e-3), st.floats(1.01, 50.0))
def test_scale_derivatives_match_finite_differences(level, eta, mult):
    sc = LogPowerScale(level, eta)
    s = sc.threshold * mult
    h = 1e-5 * s
    d1 = (sc(s + h) - sc(s - h)) / (2 * h)
    d2 = (sc(s + h) - 2 * sc(s) + sc(s - h)) / h**2
    assert float(sc.d1(s)) == pytest.approx(float(d1), rel=1e-5, abs=1e-12)
    assert float(sc.d2(s)) == pytest.approx(float(d2), rel=1e-3, abs=1e-9)
