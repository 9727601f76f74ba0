import math

import numpy as np
import pytest

from gevreykit import fields as F
from gevreykit import gevrey as G


def test_cos_low_orders():
    lad = G.ladder(F.Trig(1.0), None, 2.0, 0.75, 4)
    assert lad.N(-2) == pytest.approx(1.0, abs=1e-12)
    assert lad.N(-1) == pytest.approx(math.sin(1.0), rel=1e-9)
    assert lad.N(3) == pytest.approx(math.sin(1.0), rel=1e-9)


def test_polynomial_ladder_terminates():
    lad = G.ladder(F.Polynomial((0.0, 1.0)), None, 2.0, 0.75, 8)
    assert lad.N(-2) == pytest.approx(2.0, abs=1e-12)
    assert lad.N(-1) == pytest.approx(1.0, abs=1e-12)
    assert all(v == 0.0 for v in lad.nstar[2:])
    assert G.fit_gevrey(lad).finitely_supported


def test_synthetic_recovery():
    V, Gam, sig = 2.5, 1.8, 1.4
    vals = [V * Gam**p * math.exp(sig * math.lgamma(p + 1)) if p >= 0 else V * Gam**p
            for p in range(-2, 16)]
    fit = G.fit_gevrey(G.synthetic_ladder(vals), p_min=0)
    assert abs(fit.sigma - sig) < 1e-9
    assert abs(fit.Gamma - Gam) < 1e-9
    assert abs(fit.V - V) < 1e-9


def test_clamp_for_analytic_fields():
    fit = G.fit_gevrey(G.ladder(F.Gaussian(1.0), None, 2.0, 0.75, 14))
    assert fit.sigma == 1.0 and fit.sigma_raw < 1.0


def test_key_check_holds_with_safe_constants():
    lad = G.ladder(F.Lorentzian(1.0), None, 2.0, 0.75, 12)
    fit = G.fit_gevrey(lad)
    key = G.check_key(lad, fit.V_safe, fit.Gamma, fit.sigma)
    assert key.passed
    assert not G.check_key(lad, fit.V_safe * 0.5, fit.Gamma, fit.sigma).passed


def test_key_check_direct_matches_log_form():
    lad = G.synthetic_ladder([1.0, 1.0, 1.0, 2.0, 5.0, 20.0])
    a = G.check_key(lad, 3.0, 1.5, 1.2)
    b = G.check_key(lad, 3.0, 1.5, 1.2, direct=True)
    assert np.allclose(a.margins, b.margins, rtol=1e-12)


def test_ladder_arguments_checked():
    with pytest.raises(ValueError):
        G.ladder(F.Trig(1.0), None, 6.0, 0.75)
    with pytest.raises(ValueError):
        G.ladder(F.Trig(1.0), None, 1.0, 0.75, 40)


def test_refinement_never_lowers_supremum():
    u = F.Trig(2.3, 0.7)
    coarse = G.ladder(u, None, 1.5, 0.75, 6, grid=33, refine=False)
    fine = G.ladder(u, None, 1.5, 0.75, 6, grid=33, refine=True)
    assert all(b >= a * (1 - 1e-15) for a, b in zip(coarse.nstar, fine.nstar))


def test_source_fit_envelope():
    _, f = F.manufactured_pair("cos", 0.75)
    src = G.fit_source_constants(f)
    assert src.tau >= 1 and src.L > 0 and src.A > 0


def test_delta_schedule():
    assert G.delta_schedule(2.0, 1.5, 2) == pytest.approx(0.25)


def test_trivial_closure():
    c = G.InductionConstants(E=1, F=1, L=0, A=1, nu=0, tau=0, uSup=0, R=2.0, s=0.75)
    res = G.induction_closure(c)
    assert res.verdict == "FEASIBLE" and res.Gamma <= 2
    assert np.all(G.closure_bracket(c, res.Gamma, res.V, np.arange(1, 201)) <= 1)
