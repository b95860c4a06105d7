import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special as sps
from scipy import stats

from depcost.special import betainc, exp1, normal_sf, student_t_two_sided


def e1_quadrature(x):
    # E1(x) = exp(-x) * int_0^inf exp(-u) / (x + u) du, split where the integrand bends
    with mpmath.workdps(30):
        tail = mpmath.quad(lambda u: mpmath.exp(-u) / (x + u), [0, 0.5, 2, 8, 30, 100, mpmath.inf])
        return float(mpmath.exp(-x) * tail)


@pytest.mark.parametrize("x", [1e-8, 1e-3, 0.1, 0.5, 0.999, 1.0, 1.001, 2.5, 10.0, 40.0, 150.0])
def test_exp1_matches_quadrature(x):
    ref = e1_quadrature(x)
    assert abs(exp1(x) - ref) <= 1e-8 * abs(ref)


@given(st.floats(min_value=1e-6, max_value=60.0))
def test_exp1_relative_error_property(x):
    ref = float(mpmath.e1(x))
    assert abs(float(exp1(x)) - ref) <= 1e-8 * ref


def test_exp1_array_shape_and_edges():
    out = exp1(np.array([[0.0, -1.0], [1.0, 800.0]]))
    assert out.shape == (2, 2)
    assert np.isinf(out[0, 0]) and np.isnan(out[0, 1])
    assert out[1, 1] == 0.0 or out[1, 1] < 1e-300


@given(st.floats(0.1, 50), st.floats(0.1, 50), st.floats(0.0, 1.0))
def test_betainc_matches_scipy(a, b, x):
    assert betainc(a, b, x) == pytest.approx(float(sps.betainc(a, b, x)), rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("t,df", [(0.0, 5), (1.3, 3), (-2.2, 17), (8.0, 40), (-24.2, 5332), (3.1, 1)])
def test_student_t_matches_scipy(t, df):
    ref = 2 * stats.t.sf(abs(t), df)
    assert student_t_two_sided(t, df) == pytest.approx(ref, rel=1e-9, abs=1e-300)


def test_student_t_deep_tail_order_of_magnitude():
    p = student_t_two_sided(-24.20, 5332)
    assert 1e-124 < p < 1e-121


def test_normal_sf():
    for z in (-3.0, 0.0, 1.96, 5.0):
        assert normal_sf(z) == pytest.approx(stats.norm.sf(z), rel=1e-12)
    assert math.isnan(student_t_two_sided(float("nan"), 3))
