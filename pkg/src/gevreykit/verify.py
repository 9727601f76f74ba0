"""Verification suites: named batches of checks with tables and verdicts.

Each suite returns a :class:`SuiteResult` holding individual checks and CSV
tables.  Column layouts:

* ``stencil_convergence``: field, k, h, error, order
* ``proint_gamma{g}_r{r}``: h, lhs, rhs, ratio
* ``apriori``: pair, delta, p, lhs, rhs, ratio
* ``step``: pair, p, lhs, rhs, ratio
* ``closure``: p, bracket
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import fields as F
from . import gevrey as G
from . import kernel as Km
from . import quad as Q
from . import stencil as S

__all__ = [
    "Check",
    "SuiteResult",
    "SUITES",
    "run_suite",
    "convergence_orders",
    "kernel_H",
    "calibrate_apriori",
    "calibrate_step",
    "calibrated_constants",
]


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "detail": self.detail}


@dataclass
class SuiteResult:
    name: str
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)  # name -> (header, rows)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {
            "suite": self.name,
            "passed": self.passed,
            "checks": [c.to_json() for c in self.checks],
            "tables": sorted(self.tables),
        }


# ---------------------------------------------------------------------------
# shared pipelines

CONVERGENCE_DPS = 40
CONVERGENCE_STEPS = tuple(2.0 ** -(6 + i) for i in range(6))


def convergence_orders(u, x, k, hs, dps=CONVERGENCE_DPS):
    """Errors of the order-``k`` quotient estimate against the jet, and successive orders.

    Quotients are summed with ``dps`` digits by default; in double precision
    the roundoff floor swamps the O(h) error for ``k >= 5`` at moderate ``h``.
    """
    exact = float(F.derivative(u, x, k))
    errs = [abs(S.derivative_estimate(u, x, k, None, h, dps=dps) - exact) for h in hs]
    orders = []
    for i in range(len(errs) - 1):
        if errs[i + 1] > 0:
            orders.append(math.log2(errs[i] / errs[i + 1]) if errs[i] > 0 else -math.inf)
        else:
            orders.append(math.inf)
    return exact, errs, orders


def kernel_H(s: float, m: int = 12, seed: int = 0):
    K = Km.fractional_kernel(1, s)
    return [Km.estimate_Hk(K, k, seed=seed) for k in range(m + 1)]


def calibrate_apriori(s=0.75, r=1.0, deltas=(0.25, 0.5), ps=range(9), seed=0):
    """A priori bracket ratios on the cosine pair and on the held-out gaussian pair."""
    H = kernel_H(s, max(ps) + 2, seed)
    rows = []
    for name in ("cos", "gaussian"):
        u, f = F.manufactured_pair(name, s)
        for d in deltas:
            tables = (G.sup_table(u, r + d, max(ps) + 2), G.sup_table(f, r + d, max(ps) + 1))
            for p in ps:
                res = G.verify_apriori(u, f, r, d, p, H, s=s, tables=tables)
                rows.append((name, d, p, res.lhs, res.bracket, res.ratio))
    cal = [row[5] for row in rows if row[0] == "cos"]
    held = [row[5] for row in rows if row[0] == "gaussian"]
    C = max(cal)
    return {
        "C": C,
        "spread": max(cal) / min(cal) if min(cal) > 0 else math.inf,
        "finite": bool(np.all(np.isfinite(cal))),
        "holdout_max": max(held),
        "holdout_margin": C - max(held),
        "rows": rows,
    }


def calibrate_step(s=0.75, R=2.0, ps=range(1, 11), seed=0):
    """Calibrate ``E`` (with ``F`` from the kernel growth fit) on the cosine pair, test on gaussian."""
    H = kernel_H(s, max(ps) + 1, seed)
    fit = Km.fit_kernel_growth(H[:11])
    Fc = fit.Lambda
    pairs = {name: F.manufactured_pair(name, s) for name in ("cos", "gaussian")}
    ladders = {name: G.ladder(u, f, R, s, max(ps)) for name, (u, f) in pairs.items()}
    u = pairs["cos"][0]
    raw = [G.verify_step(ladders["cos"], p, 1.0, Fc, H, u.sup_bound).ratio for p in ps]
    E = max(raw)
    rows = []
    for name, (uu, _) in pairs.items():
        for p in ps:
            res = G.verify_step(ladders[name], p, E, Fc, H, uu.sup_bound)
            rows.append((name, p, res.lhs, res.rhs, res.ratio))
    return {
        "E": E,
        "F": Fc,
        "nu": fit.nu,
        "cal_max": max(r[4] for r in rows if r[0] == "cos"),
        "holdout_max": max(r[4] for r in rows if r[0] == "gaussian"),
        "rows": rows,
        "ladder": ladders["cos"],
    }


def calibrated_constants(s=0.75, R=2.0, seed=0):
    """Closure constants from the calibrated step, the kernel fit and the source fit."""
    step = calibrate_step(s, R, seed=seed)
    u, f = F.manufactured_pair("cos", s)
    src = G.fit_source_constants(f)
    nu = max(step["nu"], 0.0)
    c = G.InductionConstants(E=step["E"], F=step["F"], L=src.L, A=src.A, nu=nu,
                             tau=src.tau, uSup=u.sup_bound, R=R, s=s)
    return c, step, src


# ---------------------------------------------------------------------------
# suites


def suite_stencil(seed: int = 0) -> SuiteResult:
    out = SuiteResult("stencil")
    bad = []
    for k in range(13):
        m = S.build_stencil(k).moments()
        if any(v != 0 for v in m[:-1]) or m[-1] != math.factorial(k):
            bad.append(k)
    out.checks.append(Check("moments_exact_k_le_12", not bad, {"failures": bad}))

    from fractions import Fraction

    ann = all(
        S.apply_exact(S.build_stencil(k), lambda t, d=d: t**d + 3 * t, Fraction(1, 3), Fraction(1, 7)) == 0
        for k in range(3, 9) for d in range(2, k)
    )
    norm = all(
        S.apply_exact(S.build_stencil(k), lambda t, k=k: t**k, Fraction(2, 5), Fraction(1, 3))
        == math.factorial(k) * Fraction(1, 3) ** k
        for k in range(1, 13)
    )
    out.checks.append(Check("annihilation_exact", ann))
    out.checks.append(Check("normalization_exact", norm))

    hs = CONVERGENCE_STEPS
    rows = []
    worst = math.inf
    fields = {"cos": F.Trig(1.0), "exp": F.Exp(1.0), "gaussian": F.Gaussian(1.0)}
    for name, u in fields.items():
        for k in range(1, 7):
            _, errs, orders = convergence_orders(u, 0.3, k, hs)
            worst = min(worst, min(orders))
            for i, h in enumerate(hs):
                rows.append((name, k, h, errs[i], orders[i - 1] if i else ""))
    out.tables["stencil_convergence"] = (("field", "k", "h", "error", "order"), rows)
    out.checks.append(Check("convergence_order_ge_0.9", worst >= 0.9, {"worst_order": worst}))

    rng = np.random.default_rng(seed)
    lres = 0.0
    for _ in range(100):
        f = F.Trig(rng.uniform(0.5, 2), rng.uniform(0, 3))
        g = F.Gaussian(rng.uniform(0.2, 2))
        x, h = rng.uniform(-1, 1), 10 ** rng.uniform(-4, -1)
        lhs, rhs = S.leibniz_split(f, g, x, h)
        lres = max(lres, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
    out.checks.append(Check("leibniz_residual", lres <= 1e-10, {"max_relative": lres}))

    sres = 0.0
    for _ in range(100):
        n = 64
        fv = rng.normal(size=n)
        xs = np.arange(-1, n) * 0.1
        gv = np.cos(xs * rng.uniform(0.5, 3))
        res = S.summation_by_parts_residual(fv, gv, 0.1)
        scale = 0.1 * (np.abs(fv).sum() * np.abs(gv).max() * 2)
        sres = max(sres, res / scale)
    out.checks.append(Check("summation_by_parts_residual", sres <= 1e-10, {"max_relative": sres}))
    return out


def suite_proint(seed: int = 0) -> SuiteResult:
    out = SuiteResult("proint")
    K = Km.fractional_kernel(1, 0.75)
    hs = [2.0 ** -k for k in range(3, 8)]
    for g in (1, 2):
        for r in (2.0, 3.0):
            rows = Q.proint_convergence(K, g, r, hs)
            name = f"proint_gamma{g}_r{int(r)}"
            out.tables[name] = (("h", "lhs", "rhs", "ratio"), rows)
            dev = abs(rows[-1][3] - 1)
            mono = all(abs(rows[i + 1][3] - 1) <= abs(rows[i][3] - 1) for i in range(len(rows) - 1))
            out.checks.append(Check(f"{name}_final", dev <= 1e-2, {"final_deviation": dev}))
            out.checks.append(Check(f"{name}_decreasing", mono))
    rows0 = Q.proint_convergence(K, 0, 3.0, hs[:2])
    out.checks.append(Check("proint_gamma0_identity",
                            all(abs(r[3] - 1) < 1e-9 for r in rows0)))
    return out


def suite_apriori(seed: int = 0) -> SuiteResult:
    out = SuiteResult("apriori")
    cal = calibrate_apriori(seed=seed)
    out.tables["apriori"] = (("pair", "delta", "p", "lhs", "rhs", "ratio"), cal["rows"])
    out.checks.append(Check("ratios_finite", cal["finite"]))
    out.checks.append(Check("spread_le_1e2", cal["spread"] <= 1e2, {"spread": cal["spread"]}))
    out.checks.append(Check("holdout_margin_ge_0", cal["holdout_margin"] >= 0,
                            {"C": cal["C"], "holdout_max": cal["holdout_max"],
                             "margin": cal["holdout_margin"]}))
    return out


def suite_step(seed: int = 0) -> SuiteResult:
    out = SuiteResult("step")
    cal = calibrate_step(seed=seed)
    out.tables["step"] = (("pair", "p", "lhs", "rhs", "ratio"), cal["rows"])
    out.checks.append(Check("calibrated_ratios_le_1", cal["cal_max"] <= 1.0,
                            {"E": cal["E"], "F": cal["F"], "max": cal["cal_max"]}))
    out.checks.append(Check("holdout_ratio_le_1.5", cal["holdout_max"] <= 1.5,
                            {"holdout_max": cal["holdout_max"]}))
    return out


def suite_closure(seed: int = 0) -> SuiteResult:
    out = SuiteResult("closure")
    trivial = G.InductionConstants(E=1, F=1, L=0, A=1, nu=0, tau=0, uSup=0, R=2.0, s=0.75)
    res = G.induction_closure(trivial)
    out.checks.append(Check("trivial_gamma_le_2",
                            res.verdict == "FEASIBLE" and res.Gamma <= 2, res.to_json()))
    c, _, _ = calibrated_constants(seed=seed)
    res = G.induction_closure(c, p_check=200)
    ok = res.verdict == "FEASIBLE"
    if ok:
        br = G.closure_bracket(c, res.Gamma, res.V, np.arange(1, 201))
        ok = bool(np.all(br <= 1.0))
        out.tables["closure"] = (("p", "bracket"), [(p, float(b)) for p, b in zip(range(1, 201), br)])
    out.checks.append(Check("calibrated_feasible_witness", ok,
                            {"constants": c.to_json(), **res.to_json()}))
    return out


SUITES = {
    "stencil": suite_stencil,
    "proint": suite_proint,
    "apriori": suite_apriori,
    "step": suite_step,
    "closure": suite_closure,
}


def run_suite(name: str, seed: int = 0) -> list[SuiteResult]:
    if name == "all":
        return [fn(seed) for fn in SUITES.values()]
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}")
    return [SUITES[name](seed)]
