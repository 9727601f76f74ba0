import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gevreykit import fields as F

ONE_D = [
    F.Trig(1.7, 0.4),
    F.Exp(-0.5),
    F.Gaussian(0.8),
    F.Lorentzian(1.5),
    F.FlatBump(),
    F.Polynomial((1.0, -2.0, 0.5)),
    F.Sum((F.Trig(1.0), F.Gaussian(2.0))),
    F.Product((F.Trig(2.0, 0.1), F.Gaussian(0.3))),
    F.Scale(-3.0, F.Lorentzian(0.5)),
    F.Shift((0.25,), F.Gaussian(1.0)),
    F.FracGaussian(1.0, 0.75),
]


def _d1(u, x, k, h=1e-3):
    # central differences of order 2 as an independent oracle
    if k == 1:
        return (u(x + h) - u(x - h)) / (2 * h)
    return (u(x + h) - 2 * u(x) + u(x - h)) / h**2


@pytest.mark.parametrize("u", ONE_D, ids=lambda u: u.kind)
def test_jets_match_differences(u):
    xs = np.array([-0.6, -0.1, 0.35, 0.8])
    for k in (1, 2):
        d = F.derivative(u, xs, k)
        ref = _d1(u, xs, k)
        assert np.allclose(d, ref, rtol=1e-4, atol=1e-5)


@pytest.mark.parametrize("u", ONE_D, ids=lambda u: u.kind)
def test_value_is_jet_constant_term(u):
    xs = np.linspace(-0.9, 0.9, 11)
    assert np.allclose(F.derivative(u, xs, 0), u(xs), rtol=1e-14, atol=1e-300)


@pytest.mark.parametrize("u", ONE_D, ids=lambda u: u.kind)
def test_high_precision_eval_agrees(u):
    for x in (-0.7, 0.0, 0.45):
        assert abs(float(u.eval_mp(x, 30)) - float(u(x))) <= 1e-13 * max(1.0, abs(float(u(x))))


@pytest.mark.parametrize("u", ONE_D, ids=lambda u: u.kind)
def test_json_roundtrip(u):
    v = F.field_from_json(u.to_json())
    xs = np.linspace(-1, 1, 9)
    assert np.array_equal(u(xs), v(xs))


@settings(max_examples=60, deadline=None)
@given(idx=st.integers(0, len(ONE_D) - 1), x=st.floats(-50, 50))
def test_sup_bound_is_sound(idx, x):
    u = ONE_D[idx]
    assert abs(float(u(x))) <= u.sup_bound * (1 + 1e-12) + 1e-300


def test_sup_bound_on_probe_grid():
    grid = np.linspace(-20, 20, 40001)
    for u in ONE_D:
        assert np.max(np.abs(u(grid))) <= u.sup_bound * (1 + 1e-12)


def test_polynomial_unbounded():
    p = F.Polynomial((0.0, 1.0))
    assert math.isinf(p.sup_bound)
    assert p.decay.kind == "unbounded"


def test_flat_bump_is_flat_outside():
    u = F.FlatBump()
    assert float(u(1.0)) == 0.0
    j = F.jet(u, np.array([1.5]), m=6).coeffs
    assert np.all(j == 0) and not np.any(np.signbit(j))


def test_two_dimensional_mixed_partial():
    u = F.Product((F.Trig((1.0, 0.0), 0.0, 2), F.Exp((0.0, 2.0), 2)))
    d = F.derivative(u, np.array([0.3, 0.1]), (1, 2))
    assert abs(float(d) - (-math.sin(0.3) * 4 * math.exp(0.2))) < 1e-12


def test_manufactured_pairs():
    u, f = F.manufactured_pair("cos", 0.75, omega=2.0)
    assert abs(float(f(0.3)) + 2**1.5 * math.cos(0.6)) < 1e-14
    u, f = F.manufactured_pair("constant", 0.6)
    assert float(f(0.7)) == 0.0
    with pytest.raises(F.FieldError):
        F.manufactured_pair("nope", 0.75)


def test_bad_descriptors():
    with pytest.raises(F.FieldError):
        F.field_from_json({"params": {}})
    with pytest.raises(F.FieldError):
        F.make_field("polynomial", {})
    with pytest.raises(F.FieldError):
        F.make_field("wavelet")


def test_jet_order_limit():
    with pytest.raises(ValueError):
        F.jet(F.Trig(1.0), 0.0, m=F.MAX_JET_ORDER + 1)
