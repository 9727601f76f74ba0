import math

import numpy as np
import pytest

from gevreykit import fields as F
from gevreykit import kernel as Km


def test_normalising_constant_special_values():
    # n = 1, s = 1/2 gives 1/pi
    assert abs(Km.c_ns(1, 0.5) - 1 / math.pi) < 1e-15
    # n = 3, s = 1/2 gives 1/pi^2
    assert abs(Km.c_ns(3, 0.5) - 1 / math.pi**2) < 1e-15


@pytest.mark.parametrize("s", [0.5, 1.0, 0.3, 1.2])
def test_order_range(s):
    with pytest.raises(Km.KernelError):
        Km.fractional_kernel(1, s)


def test_perturbation_size_checked():
    with pytest.raises(Km.KernelError):
        Km.perturbed_kernel(1, 0.75, 2.0)
    K = Km.perturbed_kernel(1, 0.75, 0.3)
    assert not K.x_independent


def test_kernel_from_json():
    K = Km.kernel_from_json({"family": "fractional", "n": 2, "s": 0.6})
    assert K.n == 2 and K.s == 0.6
    assert Km.kernel_from_json(K.to_json()) == K
    with pytest.raises(Km.KernelError):
        Km.kernel_from_json({"family": "fractional"})
    P = Km.perturbed_kernel(2, 0.7, 0.2)
    assert Km.kernel_from_json(P.to_json()).to_json() == P.to_json()


@pytest.mark.parametrize("n", [1, 2])
def test_homogeneity(n):
    K = Km.fractional_kernel(n, 0.7)
    rng = np.random.default_rng(1)
    y = rng.normal(size=(20,) if n == 1 else (20, 2))
    lam = 0.5 + rng.random(20) * 3
    for order in (0, 3, 6):
        theta = order if n == 1 else (order - order // 2, order // 2)
        ly = y * lam if n == 1 else y * lam[:, None]
        lhs = Km.kernel_y_derivative(K, 0.0, ly, theta)
        rhs = lam ** (-(n + 2 * K.s) - order) * Km.kernel_y_derivative(K, 0.0, y, theta)
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=0)


def test_derivative_against_formula():
    K = Km.fractional_kernel(1, 0.75)
    y = np.array([0.5, 1.3, -2.0])
    a = K.homogeneous_part
    # d/dy |y|^{-q} = -q |y|^{-q-1} sign(y)
    q = 1 + 2 * K.s
    want = -q * a * np.abs(y) ** (-q - 1) * np.sign(y)
    assert np.allclose(Km.kernel_y_derivative(K, 0.0, y, 1), want, rtol=1e-13)


def test_x_derivative_of_perturbed():
    K = Km.perturbed_kernel(1, 0.75, 0.2, F.Gaussian(1.0), F.Trig(1.0, 0.5))
    x, y, h = 0.3, 0.8, 1e-5
    fd = (K(x + h, y) - K(x - h, y)) / (2 * h)
    assert abs(float(Km.kernel_derivative(K, x, y, 1, 0)) - float(fd)) < 1e-7


def test_Hk_estimates_match_closed_form():
    K = Km.fractional_kernel(1, 0.75)
    for k in range(6):
        est = Km.estimate_Hk(K, k)
        assert abs(est / Km.fractional_Hk(1, 0.75, k) - 1) < 1e-12


def test_growth_fit_recovers_law():
    ks = np.arange(11)
    H = [0.3 * 1.7**k * math.factorial(k) ** 1.0 * (k + 1) for k in ks]
    fit = Km.fit_kernel_growth(H)
    assert abs(fit.nu - 1) < 1e-9 and abs(fit.Lambda - 1.7) < 1e-8
    with pytest.raises(Km.DegenerateFitError):
        Km.fit_kernel_growth([1.0, 2.0])


def test_check_kernel_report():
    rep = Km.check_kernel(Km.fractional_kernel(1, 0.75), budget=256)
    assert rep.K1 == "PASS" and rep.K3 == "PASS"
    assert rep.eta < rep.a0 / 4
    d = rep.to_json()
    assert d["verdicts"] == {"K1": "PASS", "K3": "PASS"}
    for k, h in enumerate(rep.H):
        if k >= 1:
            assert h <= rep.Lambda**k * math.factorial(k) ** max(rep.nu, 0) * (1 + 1e-12)


def test_custom_kernel_has_no_derivatives():
    K = Km.custom_kernel(1, 0.75, lambda x, y: np.abs(y) ** -2.5)
    with pytest.raises(Km.KernelError):
        Km.kernel_derivative(K, 0.0, 1.0, 0, 1)
