import math

import numpy as np
import pytest

from gevreykit import fields as F
from gevreykit import kernel as Km
from gevreykit import quad as Q


def test_constant_field_gives_zero():
    u, _ = F.manufactured_pair("constant", 0.75)
    v = Q.evaluate(u, Km.fractional_kernel(1, 0.75), 0.4)
    assert v.value == 0.0 and v.error_bound == 0.0


@pytest.mark.parametrize("s", [0.6, 0.85])
def test_gaussian_matches_closed_form(s):
    u, f = F.manufactured_pair("gaussian", s)
    K = Km.fractional_kernel(1, s)
    for x in (0.0, 0.7, 2.5):
        v = Q.evaluate(u, K, x)
        assert abs(v.value - float(f(x))) <= 1e-9
        assert abs(v.value - float(f(x))) <= v.error_bound + 1e-9


def test_symbol_on_cosine():
    s, w = 0.75, 1.5
    u, f = F.manufactured_pair("cos", s, omega=w)
    v = Q.evaluate(u, Km.fractional_kernel(1, s), 0.2)
    assert abs(v.value / float(f(0.2)) - 1) < 1e-4


def test_two_dimensional_gaussian():
    s = 0.7
    u, f = F.manufactured_pair("gaussian", s, n=2)
    x = np.array([0.3, -0.2])
    v = Q.evaluate(u, Km.fractional_kernel(2, s), x, Q.QuadratureConfig(tol=1e-9))
    assert abs(v.value / float(f(x)) - 1) < 1e-4


def test_unbounded_field_rejected():
    with pytest.raises(Q.QuadratureError):
        Q.evaluate(F.Polynomial((0.0, 1.0)), Km.fractional_kernel(1, 0.75), 0.0)


def test_compact_field_has_no_tail():
    K = Km.fractional_kernel(1, 0.75)
    cfg = Q.QuadratureConfig()
    u = F.FlatBump()
    v = Q.evaluate(u, K, 0.2, cfg)
    # only the closed-form -2 u(x) part remains beyond R_c
    exact = -2 * float(u(0.2)) * cfg.R_c ** (-1.5) / 1.5 * 2 * K.homogeneous_part
    assert v.tail_bound == 0.0
    assert v.tail == pytest.approx(exact, rel=1e-13)


def test_config_validation():
    with pytest.raises(ValueError):
        Q.QuadratureConfig(rho=2.0, R_c=1.0)
    with pytest.raises(ValueError):
        Q.QuadratureConfig(tail_mode="magic")


def test_second_increment_even():
    u = F.Trig(1.3, 0.4)
    y = np.linspace(-1, 1, 9)
    assert np.allclose(Q.second_increment(u, 0.2, y), Q.second_increment(u, 0.2, -y))


def test_exterior_integral_numeric_matches_closed_form():
    K = Km.fractional_kernel(1, 0.75)
    for g in (0, 1, 2):
        a = Q.exterior_derivative_integral(K, g, 2.0)
        b = Q.exterior_derivative_integral(K, g, 2.0, numeric=True)
        assert abs(a / b - 1) < 1e-8


def test_proint_convergence_and_guard():
    K = Km.fractional_kernel(1, 0.75)
    rows = Q.proint_convergence(K, 1, 2.0, [2**-3, 2**-5])
    assert abs(rows[-1][3] - 1) < abs(rows[0][3] - 1)
    with pytest.raises(ValueError):
        Q.proint_convergence(K, 2, 1.0, [0.5])


def test_csv_table():
    text = Q.table_to_csv([(0.5, 1.0, 2.0, 0.5)])
    assert text.splitlines() == ["h,lhs,rhs,ratio", "0.5,1.0,2.0,0.5"]
