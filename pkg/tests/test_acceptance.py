"""Acceptance criteria, one test each; every test prints a single verdict line.

Run under pytest (lines are repeated in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""

import itertools
import math
import os
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from gevreykit import _kernels as kn
from gevreykit import fields as F
from gevreykit import gevrey as G
from gevreykit import kernel as Km
from gevreykit import quad as Q
from gevreykit import stencil as S
from gevreykit import verify as V

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # direct execution outside the tests directory
    ACCEPTANCE_LINES = []


def verdict(num, passed, detail):
    line = f"CRITERION {num} {'PASS' if passed else 'FAIL'}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert passed, line


@pytest.fixture(scope="module", autouse=True)
def warm_up():
    # compile the numba kernels once so timed sections measure steady state
    F.jet(F.Product((F.Trig(1.0), F.Gaussian(1.0))), np.array([0.1]), m=6)
    F.jet(F.Lorentzian(1.0), np.array([0.1]), m=6)
    F.derivative(F.Sum((F.Trig((1.0, 1.0), 0.0, 2), F.Gaussian(1.0, 2))), np.array([0.1, 0.2]), (1, 1))
    kn.cummax_sweep(np.array([0.5]), np.array([[1.0]]), np.array([1.0]))


def test_criterion_01_stencil_exactness():
    t = time.perf_counter()
    S._cached.cache_clear()
    bad = []
    for k in range(13):
        st = S.build_stencil(k)
        for m in range(1, k + 2):
            mom = sum((c * Fraction(j) ** (m - 1) for c, j in zip(st.coefficients, st.nodes)),
                      Fraction(0))
            want = math.factorial(k) if m == k + 1 else 0
            if not (isinstance(mom, Fraction) and mom == want):
                bad.append((k, m))
    dt = time.perf_counter() - t
    verdict(1, not bad and dt < 1.0, f"k<=12 exact moments, failures={bad}, runtime={dt:.3f}s (<1s)")


def test_criterion_02_convergence():
    t = time.perf_counter()
    worst, where = math.inf, None
    fields = {"cos": F.Trig(1.0), "exp": F.Exp(1.0), "gaussian": F.Gaussian(1.0)}
    for name, u in fields.items():
        for k in range(1, 7):
            _, errs, orders = V.convergence_orders(u, 0.3, k, V.CONVERGENCE_STEPS)
            if min(orders) < worst:
                worst, where = min(orders), (name, k)
    dt = time.perf_counter() - t
    verdict(2, worst >= 0.9 and dt < 5.0,
            f"worst empirical order {worst:.3f} at {where} over 5 halvings (>=0.9), runtime={dt:.2f}s (<5s)")


def test_criterion_03_discrete_identities():
    rng = np.random.default_rng(2024)
    lres = 0.0
    for _ in range(100):
        f = F.Trig(rng.uniform(0.5, 2), rng.uniform(0, 3))
        g = F.Gaussian(rng.uniform(0.2, 2))
        x, h = rng.uniform(-1, 1), 10 ** rng.uniform(-4, -1)
        lhs, rhs = S.leibniz_split(f, g, x, h)
        lres = max(lres, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
    sres = 0.0
    for _ in range(100):
        n = int(rng.integers(8, 128))
        h = rng.uniform(0.01, 0.5)
        fv = rng.normal(size=n)
        gv = rng.normal(size=n + 1)
        res = S.summation_by_parts_residual(fv, gv, h)
        scale = h * 2 * np.abs(fv).sum() * np.abs(gv).max()
        sres = max(sres, res / scale)
    verdict(3, lres <= 1e-10 and sres <= 1e-10,
            f"Leibniz max rel residual {lres:.2e}, summation-by-parts max rel residual {sres:.2e} (<=1e-10)")


def test_criterion_04_homogeneity():
    rng = np.random.default_rng(7)
    worst = 0.0
    for n in (1, 2):
        K = Km.fractional_kernel(n, 0.7)
        thetas = ([t for t in range(9)] if n == 1
                  else [(a, b) for a, b in itertools.product(range(9), repeat=2) if a + b <= 8])
        y = rng.normal(size=(100,) if n == 1 else (100, 2))
        lam = np.exp(rng.uniform(-2, 2, size=100))
        ly = y * lam if n == 1 else y * lam[:, None]
        for th in thetas:
            order = th if n == 1 else sum(th)
            lhs = Km.kernel_y_derivative(K, 0.0, ly, th)
            rhs = lam ** (-(n + 2 * K.s) - order) * Km.kernel_y_derivative(K, 0.0, y, th)
            nz = np.abs(rhs) > 0
            scale = np.max(np.abs(rhs))
            d = np.abs(lhs - rhs) / np.where(nz, np.abs(rhs), scale)
            worst = max(worst, float(np.max(d)))
    verdict(4, worst <= 1e-12, f"max relative homogeneity defect {worst:.2e} over |theta|<=8, n=1,2 (<=1e-12)")


def test_criterion_05_growth_fit():
    t = time.perf_counter()
    H = V.kernel_H(0.75, 10)
    fit = Km.fit_kernel_growth(H)
    dt = time.perf_counter() - t
    ok = 0.8 <= fit.nu <= 1.2 and math.isfinite(fit.Lambda) and dt < 10
    verdict(5, ok, f"nu={fit.nu:.4f} in [0.8,1.2], Lambda={fit.Lambda:.4f} finite, runtime={dt:.2f}s (<10s)")


def test_criterion_06_symbol():
    t = time.perf_counter()
    worst = 0.0
    for s in (0.6, 0.75, 0.9):
        K = Km.fractional_kernel(1, s)
        for w in (1.0, 2.0):
            u, f = F.manufactured_pair("cos", s, omega=w)
            for x in (0.0, 0.3):
                v = Q.evaluate(u, K, x)
                worst = max(worst, abs(v.value / float(f(x)) - 1))
    dt = time.perf_counter() - t
    verdict(6, worst <= 1e-4 and dt < 30, f"max relative symbol error {worst:.2e} (<=1e-4), runtime={dt:.2f}s (<30s)")


def test_criterion_07_s_to_one():
    v = Q.evaluate(F.Gaussian(1.0), Km.fractional_kernel(1, 0.999), 0.0)
    dev = abs(v.value / -2.0 - 1)
    verdict(7, dev <= 0.02, f"s=0.999 value {v.value:.6f} vs u''(0)=-2, deviation {dev:.2%} (<=2%)")


def test_criterion_08_exterior_quotients():
    K = Km.fractional_kernel(1, 0.75)
    hs = [2.0 ** -k for k in range(3, 8)]
    worst = 0.0
    for g in (1, 2):
        for r in (2.0, 3.0):
            rows = Q.proint_convergence(K, g, r, hs)
            worst = max(worst, abs(rows[-1][3] - 1))
    verdict(8, worst <= 1e-2, f"max |lhs/rhs-1| at h=2^-7: {worst:.2e} (<=1e-2)")


def test_criterion_09_apriori_surrogate():
    cal = V.calibrate_apriori()
    ok = cal["finite"] and cal["spread"] <= 1e2 and cal["holdout_margin"] >= 0
    verdict(9, ok, f"finite={cal['finite']}, spread={cal['spread']:.3e} (<=1e2), C={cal['C']:.4g}, "
                   f"held-out max={cal['holdout_max']:.4g}, margin={cal['holdout_margin']:.4g} (>=0)")


def test_criterion_10_step_surrogate():
    cal = V.calibrate_step()
    ok = cal["cal_max"] <= 1.0 and cal["holdout_max"] <= 1.5
    verdict(10, ok, f"E={cal['E']:.4g}, F={cal['F']:.4g}, calibrated max ratio {cal['cal_max']:.4f} (<=1), "
                    f"held-out max ratio {cal['holdout_max']:.4f} (<=1.5)")


def test_criterion_11_closure():
    c, _, _ = V.calibrated_constants()
    trivial = G.InductionConstants(E=1, F=1, L=0, A=1, nu=0, tau=0, uSup=0, R=2.0, s=0.75)
    t = time.perf_counter()
    r0 = G.induction_closure(trivial)
    r1 = G.induction_closure(c, p_check=200)
    dt = time.perf_counter() - t
    ok1 = r1.verdict == "FEASIBLE" and math.isfinite(r1.Gamma)
    if ok1:
        br = G.closure_bracket(c, r1.Gamma, r1.V, np.arange(1, 201))
        ok1 = bool(np.all(br <= 1.0))
    ok = r0.verdict == "FEASIBLE" and r0.Gamma <= 2 and ok1 and dt < 1
    verdict(11, ok, f"trivial Gamma={r0.Gamma:.4f} (<=2), calibrated {r1.verdict} Gamma={r1.Gamma:.4g} "
                    f"re-verified p<=200, runtime={dt:.3f}s (<1s)")


def test_criterion_12_gevrey_fits():
    t = time.perf_counter()
    sig = {}
    for name, u in {"cos": F.Trig(1.0), "exp": F.Exp(1.0), "gaussian": F.Gaussian(1.0),
                    "lorentzian": F.Lorentzian(1.0)}.items():
        sig[name] = G.fit_gevrey(G.ladder(u, None, 2.0, 0.75, 14)).sigma
    bump = G.fit_gevrey(G.ladder(F.FlatBump(), None, 2.0, 0.75, 18)).sigma
    rec = 0.0
    for V0, Gam, s0 in ((1.0, 1.0, 1.0), (3.5, 0.7, 1.6), (0.2, 2.5, 2.0)):
        vals = [V0 * Gam**p * math.exp(s0 * math.lgamma(p + 1) if p >= 0 else 0.0)
                for p in range(-2, 17)]
        fit = G.fit_gevrey(G.synthetic_ladder(vals), p_min=0)
        rec = max(rec, abs(fit.sigma - s0), abs(fit.Gamma / Gam - 1), abs(fit.V / V0 - 1))
    dt = time.perf_counter() - t
    ok = all(0.85 <= v <= 1.15 for v in sig.values()) and 1.7 <= bump <= 2.3 and rec <= 1e-6 and dt < 60
    detail = ", ".join(f"{k} sigma={v:.3f}" for k, v in sig.items())
    verdict(12, ok, f"{detail} (in [0.85,1.15]); flat_bump sigma={bump:.3f} (in [1.7,2.3]); "
                    f"synthetic recovery error {rec:.1e} (<=1e-6); runtime={dt:.1f}s (<60s)")


def test_criterion_13_determinism(tmp_path):
    outs = []
    env = dict(os.environ)
    for tag in ("a", "b"):
        out = tmp_path / tag
        proc = subprocess.run([sys.executable, "-m", "gevreykit", "verify", "--suite", "all",
                               "--seed", "0", "--out", str(out)], capture_output=True, env=env)
        assert proc.returncode in (0, 1), proc.stderr.decode()
        outs.append(out)
    same = (outs[0] / "report.json").read_bytes() == (outs[1] / "report.json").read_bytes()
    tables = sorted(p.name for p in (outs[0] / "tables").iterdir())
    same_tables = all((outs[0] / "tables" / n).read_bytes() == (outs[1] / "tables" / n).read_bytes()
                      for n in tables)
    verdict(13, same and same_tables,
            f"two 'verify --suite all' runs: report identical={same}, {len(tables)} tables identical={same_tables}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
