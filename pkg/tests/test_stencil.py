import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gevreykit import fields as F
from gevreykit import stencil as S


@pytest.mark.parametrize("k,nodes", [(0, [0]), (1, [0, 1]), (2, [-1, 0, 1]), (3, [-1, 0, 1, 2]),
                                     (4, [-2, -1, 0, 1, 2])])
def test_nodes(k, nodes):
    assert S.stencil_nodes(k) == nodes


def test_second_order_weights():
    st_ = S.build_stencil(2)
    assert st_.coefficients == (1, -2, 1)
    assert S.build_stencil(0).coefficients == (1,)


@pytest.mark.parametrize("k", range(17))
def test_moments_exact(k):
    m = S.build_stencil(k).moments()
    assert all(v == 0 for v in m[:-1])
    assert m[-1] == math.factorial(k)


def test_order_bound():
    with pytest.raises(S.OrderTooLargeError):
        S.build_stencil(17)
    with pytest.raises(ValueError):
        S.build_stencil(-1)


def test_json_roundtrip():
    st_ = S.build_stencil(7)
    assert S.Stencil.from_json(st_.to_json()) == st_


@settings(max_examples=40, deadline=None)
@given(k=st.integers(1, 10), d=st.integers(0, 9),
       x=st.fractions(-3, 3, max_denominator=50), h=st.fractions(1, 50, max_denominator=50))
def test_polynomials_below_order_are_annihilated(k, d, x, h):
    st_ = S.build_stencil(k)
    val = S.apply_exact(st_, lambda t: t**d, x, h)
    if d < k:
        assert val == 0
    elif d == k:
        assert val == math.factorial(k) * h**k


def test_batch_and_scalar_agree():
    u = F.Trig(1.3, 0.2)
    xs = np.linspace(-1, 1, 7)
    batch = S.apply(S.build_stencil(3), u, xs, 0.05)
    single = [S.apply(S.build_stencil(3), u, float(x), 0.05) for x in xs]
    assert np.array_equal(batch, np.array(single))


def test_high_precision_path_matches_double_at_moderate_h():
    u = F.Gaussian(0.7)
    for k in (1, 3, 5):
        d = S.derivative_estimate(u, 0.3, k, h=2**-4)
        m = S.derivative_estimate(u, 0.3, k, h=2**-4, dps=40)
        assert abs(d - m) <= 1e-9 * max(1.0, abs(m))


def test_high_precision_removes_roundoff_floor():
    u = F.Exp(1.0)
    exact = math.exp(0.3)
    h = 2**-12
    err_mp = abs(S.derivative_estimate(u, 0.3, 6, h=h, dps=40) - exact)
    err_d = abs(S.derivative_estimate(u, 0.3, 6, h=h) - exact)
    assert err_mp < 1e-2 < err_d


def test_multistencil_permutation_bit_identical():
    u = F.Product((F.Trig((1.0, 0.5), 0.1, 2), F.Gaussian(0.4, 2)))
    fac = [((1.0, 0.0), 2), ((0.0, 1.0), 1), ((0.6, 0.8), 1)]
    x = np.array([0.2, -0.4])
    vals = {S.apply_multi(S.MultiStencil(tuple(p)), u, x, 0.01) for p in itertools.permutations(fac)}
    assert len(vals) == 1


def test_multistencil_mixed_partial():
    u = F.Product((F.Trig((1.0, 0.0), 0.0, 2), F.Exp((0.0, 1.0), 2)))
    ms = S.MultiStencil((((1.0, 0.0), 1), ((0.0, 1.0), 1)))
    h = 1e-4
    est = S.apply_multi(ms, u, np.array([0.3, 0.2]), h) / h**2
    assert abs(est - (-math.sin(0.3) * math.exp(0.2))) < 1e-3


@settings(max_examples=50, deadline=None)
@given(x=st.floats(-1, 1), h=st.floats(1e-4, 1e-1), a=st.floats(0.2, 2), w=st.floats(0.5, 2))
def test_leibniz_split(x, h, a, w):
    f, g = F.Trig(w, 0.3), F.Gaussian(a)
    lhs, rhs = S.leibniz_split(f, g, x, h)
    assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs), 1e-3)


def test_summation_by_parts():
    rng = np.random.default_rng(3)
    f = rng.normal(size=40)
    g = rng.normal(size=41)
    assert S.summation_by_parts_residual(f, g, 0.1) < 1e-13
    with pytest.raises(S.WindowMismatchError):
        S.summation_by_parts_residual(f, g[:-1], 0.1)


def test_exact_fraction_inputs():
    st_ = S.build_stencil(4)
    assert S.apply_exact(st_, lambda t: t**4, Fraction(1, 3), Fraction(1, 2)) == Fraction(24, 16)
