"""Weighted derivative ladders, Gevrey fits and the estimate checks built on them.

For a radius ``R`` the ladders are

    N*(p) = sup_{R/2 < r < R} (R - r)^{p+2}      sup_{B_r} |u^{(p+2)}|,   p >= -2
    M(p)  = sup_{R/2 < r < R} (R - r)^{2s+p+1}   sup_{B_r} |f^{(p+1)}|,   p >= 0

Everything here is one-dimensional.  Spatial suprema are sampled: a nested
equispaced grid on ``[-R, R]`` plus golden-section polishing of every discrete
local maximum, all evaluated with jets.  Once the spatial samples are fixed,
``r -> sup_{B_r}`` is a step function, so the supremum over ``r`` is attained
at ``R/2`` or at a sample radius; the ``r`` grid is scanned first and the
sample radii are then checked exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .fields import ScalarField, jet

__all__ = [
    "SupTable",
    "NormLadder",
    "GevreyFit",
    "KeyCheck",
    "SourceFit",
    "InductionConstants",
    "ClosureResult",
    "AprioriResult",
    "StepResult",
    "sup_table",
    "ladder",
    "synthetic_ladder",
    "check_key",
    "fit_gevrey",
    "fit_source_constants",
    "delta_schedule",
    "verify_apriori",
    "verify_step",
    "closure_bracket",
    "induction_closure",
    "MAX_LADDER_P",
]

MAX_LADDER_P = 18
_GOLD = (math.sqrt(5) - 1) / 2


def _lfact(p):
    """``log [p!]`` with ``[p!] = 1`` for negative ``p``."""
    return math.lgamma(p + 1) if p >= 0 else 0.0


# ---------------------------------------------------------------------------
# sampled suprema


@dataclass(frozen=True)
class SupTable:
    """Samples ``|D^q g(x_i)|`` for ``q = 0..order`` at points ``x_i`` in ``[-R, R]``."""

    absx: np.ndarray
    vals: np.ndarray  # (order + 1, npoints)

    @property
    def order(self) -> int:
        return self.vals.shape[0] - 1

    def sup(self, radii, rows=None) -> np.ndarray:
        """``sup_{|x| <= r} |D^q g|`` for each row ``q`` and radius ``r``."""
        radii = np.ascontiguousarray(np.atleast_1d(np.asarray(radii, dtype=float)))
        vals = self.vals if rows is None else self.vals[rows]
        out = _kernels.cummax_sweep(self.absx, np.ascontiguousarray(vals), radii)
        return np.maximum(out, 0.0)


def _abs_derivs(u: ScalarField, pts, order):
    return np.abs(jet(u, pts, None, order).derivatives())


def sup_table(u: ScalarField, R: float, order: int, grid: int = 513,
              refine: bool = True, iters: int = 48) -> SupTable:
    """Sample all derivatives of ``u`` up to ``order`` on ``[-R, R]``.

    With ``refine`` each discrete local maximum of each derivative is polished
    by golden-section search inside its two neighbouring cells; the polished
    points are added to the sample set.
    """
    if u.n != 1:
        raise ValueError("ladders are implemented in one dimension")
    if grid < 3:
        raise ValueError("grid needs at least three points")
    xs = np.linspace(-R, R, grid)
    vals = _abs_derivs(u, xs, order)
    if refine:
        extra = _polish_maxima(u, xs, vals, order, iters)
        if extra.size:
            xs = np.concatenate([xs, extra])
            vals = np.concatenate([vals, _abs_derivs(u, extra, order)], axis=1)
    return SupTable(np.abs(xs), vals)


def _polish_maxima(u, xs, vals, order, iters):
    left = vals[:, 1:-1] >= vals[:, :-2]
    right = vals[:, 1:-1] >= vals[:, 2:]
    q_idx, i_idx = np.nonzero(left & right & (vals[:, 1:-1] > 0))
    if q_idx.size == 0:
        return np.empty(0)
    i_idx = i_idx + 1
    a = xs[i_idx - 1].copy()
    b = xs[i_idx + 1].copy()
    c = b - _GOLD * (b - a)
    d = a + _GOLD * (b - a)
    cols = np.arange(q_idx.size)

    def val_at(pts):
        return _abs_derivs(u, pts, order)[q_idx, cols]

    fc, fd = val_at(c), val_at(d)
    for _ in range(iters):
        # maximise: keep the half of the bracket holding the larger probe
        gl = fc >= fd
        b = np.where(gl, d, b)
        a = np.where(gl, a, c)
        nc = np.where(gl, b - _GOLD * (b - a), d)
        nd = np.where(gl, c, a + _GOLD * (b - a))
        fp = val_at(np.where(gl, nc, nd))
        fc, fd = np.where(gl, fp, fd), np.where(gl, fc, fp)
        c, d = nc, nd
    return np.unique(0.5 * (a + b))


def _sup_over_r(table: SupTable, rows, weights, R, r_points, refine):
    """``sup_{r in [R/2, R]} (R - r)^{w_q} sup_{B_r} |D^q g|`` for each row."""
    rows = np.asarray(rows)
    weights = np.asarray(weights, dtype=float)
    rg = np.linspace(R / 2, R, r_points)
    if refine:
        inside = table.absx[(table.absx >= R / 2) & (table.absx <= R)]
        rg = np.unique(np.concatenate([rg, inside]))
    sups = table.sup(rg, rows)
    gap = R - rg
    with np.errstate(divide="ignore", invalid="ignore"):
        logw = weights[:, None] * np.log(gap)[None, :]
    wts = np.where(weights[:, None] == 0, 1.0, np.exp(logw))
    return np.max(wts * sups, axis=1)


# ---------------------------------------------------------------------------
# ladders


@dataclass(frozen=True)
class NormLadder:
    R: float
    s: float
    p_max: int
    nstar: tuple  # p = -2..p_max
    m: tuple  # p = 0..p_max (empty if no source field was given)
    r_points: int = 64
    grid: int = 513
    refined: bool = True

    def N(self, p: int) -> float:
        if not -2 <= p <= self.p_max:
            raise KeyError(f"ladder has no entry for p = {p}")
        return self.nstar[p + 2]

    def M(self, p: int) -> float:
        if not 0 <= p < len(self.m):
            raise KeyError(f"ladder has no source entry for p = {p}")
        return self.m[p]

    @property
    def ps(self) -> np.ndarray:
        return np.arange(-2, self.p_max + 1)

    def to_json(self) -> dict:
        return {
            "R": self.R,
            "s": self.s,
            "p_max": self.p_max,
            "Nstar": {str(p): v for p, v in zip(range(-2, self.p_max + 1), self.nstar)},
            "M": {str(p): v for p, v in enumerate(self.m)},
            "r_points": self.r_points,
            "grid": self.grid,
            "refined": self.refined,
            "note": "sampled supremum",
        }


def ladder(u: ScalarField, f: ScalarField | None, R: float, s: float, p_max: int = 14,
           r_points: int = 64, grid: int = 513, refine: bool = True) -> NormLadder:
    """Compute ``N*(p)`` for ``p = -2..p_max`` and ``M(p)`` for ``p = 0..p_max``."""
    if not 0 < R <= 5:
        raise ValueError("R must lie in (0, 5]")
    if not 0 <= p_max <= MAX_LADDER_P:
        raise ValueError(f"p_max must lie in [0, {MAX_LADDER_P}]")
    if r_points < 2:
        raise ValueError("need at least two r points")
    tu = sup_table(u, R, p_max + 2, grid, refine)
    rows = np.arange(p_max + 3)
    nstar = _sup_over_r(tu, rows, rows.astype(float), R, r_points, refine)
    m = ()
    if f is not None:
        tf = sup_table(f, R, p_max + 1, grid, refine)
        frows = np.arange(1, p_max + 2)
        m = tuple(float(v) for v in _sup_over_r(tf, frows, 2 * s + frows, R, r_points, refine))
    return NormLadder(float(R), float(s), int(p_max), tuple(float(v) for v in nstar), m,
                      int(r_points), int(grid), bool(refine))


def synthetic_ladder(values, R: float = 1.0, s: float = 0.75, m=()) -> NormLadder:
    """Ladder from explicit ``N*`` values for ``p = -2, -1, 0, ...``."""
    values = tuple(float(v) for v in values)
    if len(values) < 3:
        raise ValueError("need entries at least for p = -2..0")
    return NormLadder(R, s, len(values) - 3, values, tuple(float(v) for v in m),
                      0, 0, False)


# ---------------------------------------------------------------------------
# Gevrey bounds


@dataclass(frozen=True)
class KeyCheck:
    worst: float
    margins: tuple
    passed: bool
    worst_p: int


def check_key(lad: NormLadder, V: float, Gamma: float, sigma: float,
              direct: bool = False) -> KeyCheck:
    """Margins ``V Gamma^p [p!]^sigma - N*(p)`` over the whole ladder.

    The default evaluates ``N (exp(log B - log N) - 1)`` so nothing overflows;
    ``direct`` forms the bound itself (for cross-checking at small ``p``).
    """
    if not (V > 0 and Gamma > 0):
        raise ValueError("V and Gamma must be positive")
    if sigma < 1:
        raise ValueError("sigma must be at least 1")
    margins = []
    for p, n in zip(range(-2, lad.p_max + 1), lad.nstar):
        if direct:
            margins.append(V * Gamma**p * math.exp(sigma * _lfact(p)) - n)
            continue
        logb = math.log(V) + p * math.log(Gamma) + sigma * _lfact(p)
        if n == 0:
            margins.append(math.exp(logb) if logb < 700 else math.inf)
        else:
            d = logb - math.log(n)
            margins.append(n * math.expm1(d) if d < 700 else math.inf)
    i = int(np.argmin(margins))
    return KeyCheck(float(margins[i]), tuple(margins), margins[i] >= 0, i - 2)


@dataclass(frozen=True)
class GevreyFit:
    sigma: float
    logGamma: float
    logV: float | None
    residual: float
    p_range: tuple
    sigma_raw: float
    inflation: float = 0.0  # add to logV so the bound covers every ladder entry
    finitely_supported: bool = False

    @property
    def V(self) -> float:
        return 0.0 if self.logV is None else math.exp(self.logV)

    @property
    def Gamma(self) -> float:
        return math.exp(self.logGamma)

    @property
    def V_safe(self) -> float:
        return 0.0 if self.logV is None else math.exp(self.logV + self.inflation)

    def to_json(self) -> dict:
        return {
            "sigma": self.sigma,
            "sigma_raw": self.sigma_raw,
            "logGamma": self.logGamma,
            "logV": self.logV,
            "residual": self.residual,
            "inflation": self.inflation,
            "p_range": list(self.p_range),
            "finitely_supported": self.finitely_supported,
        }


def fit_gevrey(lad: NormLadder, p_min: int | None = None, p_max: int | None = None,
               clamp: bool = True) -> GevreyFit:
    """Least squares of ``log N*(p)`` on ``(1, p, log p!)``.

    The default window is ``[p_max // 3, p_max]``: low orders carry the
    transient of the spatial weight rather than the asymptotic growth.  If the
    fitted ``sigma`` falls below 1 and ``clamp`` is set, ``sigma`` is fixed at 1
    and the other two constants are refitted.  Fewer than five positive entries
    in the window yields a finitely supported result.
    """
    hi = lad.p_max if p_max is None else min(p_max, lad.p_max)
    lo = max(hi // 3, 0) if p_min is None else max(p_min, -2)
    ps = np.arange(lo, hi + 1)
    ns = np.array([lad.N(int(p)) for p in ps])
    use = ns > 0
    if use.sum() < 5:
        top = max(lad.nstar)
        return GevreyFit(1.0, 0.0, math.log(top) if top > 0 else None, 0.0,
                         (int(lo), int(hi)), 1.0, 0.0, True)
    p = ps[use].astype(float)
    y = np.log(ns[use])
    lf = np.array([_lfact(int(q)) for q in p])
    A = np.stack([np.ones_like(p), p, lf], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    sigma_raw = float(coef[2])
    if clamp and sigma_raw < 1:
        A2 = A[:, :2]
        c2, *_ = np.linalg.lstsq(A2, y - lf, rcond=None)
        coef = np.array([c2[0], c2[1], 1.0])
    fitted = A @ coef
    res = float(np.sqrt(np.mean((fitted - y) ** 2)))
    # envelope over every positive ladder entry, not only the window
    allp = np.array([q for q in range(-2, lad.p_max + 1) if lad.N(q) > 0])
    logs = np.array([math.log(lad.N(int(q))) for q in allp])
    model = coef[0] + coef[1] * allp + coef[2] * np.array([_lfact(int(q)) for q in allp])
    # slack of 1e-12 in log space absorbs rounding at the tightest entry
    infl = float(max(0.0, np.max(logs - model))) + 1e-12
    return GevreyFit(float(coef[2]), float(coef[1]), float(coef[0]), res,
                     (int(lo), int(hi)), sigma_raw, infl, False)


@dataclass(frozen=True)
class SourceFit:
    """Constants with ``sup_{B_R} |f^{(p)}| <= L (A/R)^p (p!)^tau`` for ``R <= R_max``."""

    L: float
    A: float
    tau: float
    tau_raw: float
    residual: float

    def to_json(self) -> dict:
        return {"L": self.L, "A": self.A, "tau": self.tau, "tau_raw": self.tau_raw,
                "residual": self.residual}


def fit_source_constants(f: ScalarField, R_max: float = 6.0, p_max: int = 14,
                         grid: int = 513, radii: int = 64) -> SourceFit:
    """Fit ``(L, A, tau)`` to ``g_p = max_R R^p sup_{B_R} |f^{(p)}|``.

    ``tau`` is clamped at 1 and ``L`` raised until the bound holds for every
    sampled ``p``.
    """
    tab = sup_table(f, R_max, p_max, grid)
    Rs = np.linspace(R_max / radii, R_max, radii)
    sups = tab.sup(Rs)
    p = np.arange(p_max + 1, dtype=float)
    g = np.max(sups * Rs[None, :] ** p[:, None], axis=1)
    use = g > 0
    if use.sum() < 3:
        return SourceFit(float(g.max()) if g.size else 0.0, 1.0, 1.0, 1.0, 0.0)
    lf = np.array([math.lgamma(q + 1) for q in p])
    y = np.log(g[use])
    A = np.stack([np.ones(use.sum()), p[use], lf[use]], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    tau_raw = float(coef[2])
    if tau_raw < 1:
        c2, *_ = np.linalg.lstsq(A[:, :2], y - lf[use], rcond=None)
        coef = np.array([c2[0], c2[1], 1.0])
    res = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    logL = coef[0] + float(np.max(y - A @ coef))
    return SourceFit(math.exp(logL), math.exp(coef[1]), float(coef[2]), tau_raw, res)


# ---------------------------------------------------------------------------
# estimate checks


def delta_schedule(R: float, r: float, p: int) -> float:
    """``(R - r) / p``; undefined at ``p = 0``."""
    if p < 1:
        raise ValueError("the schedule needs p >= 1; pass delta explicitly at p = 0")
    if not R / 2 < r < R:
        raise ValueError("need R/2 < r < R")
    return (R - r) / p


@dataclass(frozen=True)
class AprioriResult:
    p: int
    r: float
    delta: float
    lhs: float
    bracket: float
    ratio: float
    terms: tuple


def verify_apriori(u: ScalarField, f: ScalarField, r: float, delta: float, p: int, H,
                   u_sup: float | None = None, s: float = 0.75, grid: int = 513,
                   tables=None) -> AprioriResult:
    """Compare ``sup_{B_r} |u^{(p+2)}|`` against the bracket of lower-order terms.

    The bracket is
    ``sup|u^{(p+1)}|/delta + sup|u^{(p)}|/delta^2 + delta^{2s-1} sup|f^{(p+1)}|
    + H_{p+1} 2^p delta^{-(p+2)} |u|_inf`` with suprema over ``B_{r+delta}``.
    ``tables`` may carry precomputed ``(SupTable of u, SupTable of f)``.
    """
    if not (r > 0 and delta > 0 and r + delta < 5):
        raise ValueError("need 0 < r < r + delta < 5")
    if p < 0:
        raise ValueError("p must be non-negative")
    if len(H) <= p + 1:
        raise ValueError(f"H_{p + 1} is missing")
    R_out = r + delta
    if tables is None:
        tables = (sup_table(u, R_out, p + 2, grid), sup_table(f, R_out, p + 1, grid))
    tu, tf = tables
    lhs = float(tu.sup([r], [p + 2])[0, 0])
    su = tu.sup([R_out], [p + 1, p])[:, 0]
    sf = float(tf.sup([R_out], [p + 1])[0, 0])
    usup = u.sup_bound if u_sup is None else u_sup
    terms = (
        float(su[0]) / delta,
        float(su[1]) / delta**2,
        delta ** (2 * s - 1) * sf,
        float(H[p + 1]) * 2.0**p * delta ** (-(p + 2)) * usup,
    )
    br = sum(terms)
    return AprioriResult(p, r, delta, lhs, br, lhs / br if br > 0 else 0.0, terms)


@dataclass(frozen=True)
class StepResult:
    p: int
    lhs: float
    rhs: float
    ratio: float


def verify_step(lad: NormLadder, p: int, E: float, F: float, H, u_sup: float) -> StepResult:
    """``N*(p)`` against ``E [p N*(p-1) + p(p-1) N*(p-2) + M(p) + F^p H_{p+1} p! |u|_inf]``."""
    if p < 1:
        raise ValueError("the step needs p >= 1")
    if len(H) <= p + 1:
        raise ValueError(f"H_{p + 1} is missing")
    lhs = lad.N(p)
    rhs = E * (
        p * lad.N(p - 1)
        + p * (p - 1) * lad.N(p - 2)
        + lad.M(p)
        + F**p * float(H[p + 1]) * math.factorial(p) * u_sup
    )
    return StepResult(p, lhs, rhs, lhs / rhs if rhs > 0 else 0.0)


# ---------------------------------------------------------------------------
# induction closure


@dataclass(frozen=True)
class InductionConstants:
    E: float
    F: float
    L: float
    A: float
    nu: float
    tau: float
    uSup: float
    R: float
    s: float
    sigma: float | None = None

    def __post_init__(self):
        floor = max(1 + self.nu, self.tau)
        if self.sigma is None:
            object.__setattr__(self, "sigma", floor)
        elif self.sigma < floor - 1e-12:
            raise ValueError(f"sigma must be at least max(1 + nu, tau) = {floor:g}")
        for name in ("E", "F", "L", "A", "uSup", "R"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in
                ("E", "F", "L", "A", "nu", "tau", "uSup", "R", "s", "sigma")}


def _log_terms(c: InductionConstants, Gamma: float, V: float, p: np.ndarray):
    """Logs of the two ``p``-dependent bracket terms (``-inf`` when absent)."""
    lg = math.log(Gamma)
    with np.errstate(divide="ignore"):
        t3 = (np.log(c.uSup) if c.uSup > 0 else -np.inf) - math.log(V) + p * (
            (math.log(c.F) if c.F > 0 else -np.inf) - lg)
        t4 = ((math.log(c.L) if c.L > 0 else -np.inf) - math.log(V) - p * lg
              + 2 * c.s * math.log(c.R / 2)
              + (p + 1) * (math.log(c.A / 2) if c.A > 0 else -np.inf)
              + c.tau * np.log(p + 1))
    return t3, t4


def closure_bracket(c: InductionConstants, Gamma: float, V: float, p) -> np.ndarray:
    """``E [1/G + 1/G^2 + (F/G)^p |u|/V + L/(V G^p) (R/2)^{2s} (A/2)^{p+1} (p+1)^tau]``."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    t3, t4 = _log_terms(c, Gamma, V, p)
    return c.E * (1 / Gamma + 1 / Gamma**2 + np.exp(t3) + np.exp(t4))


@dataclass(frozen=True)
class ClosureResult:
    Gamma: float | None
    V: float
    verdict: str
    max_bracket: float
    terminal_ratio: float
    p_check: int

    def to_json(self) -> dict:
        return {
            "Gamma": self.Gamma,
            "V": self.V,
            "verdict": self.verdict,
            "max_bracket": self.max_bracket,
            "terminal_ratio": self.terminal_ratio,
            "p_check": self.p_check,
        }


def _feasible(c, Gamma, V, p_check):
    ps = np.arange(1, p_check + 2)
    br = closure_bracket(c, Gamma, V, ps)
    # p-dependent part must be eventually geometric: Gamma above F and A/2
    asym = Gamma > c.F and Gamma > c.A / 2
    t3, t4 = _log_terms(c, Gamma, V, ps[-2:].astype(float))
    tail = np.exp(t3) + np.exp(t4)
    ratio = float(tail[1] / tail[0]) if tail[0] > 0 else 0.0
    ok = bool(np.all(br[:-1] <= 1.0)) and asym and ratio < 1.0
    return ok, float(br[:-1].max()), ratio


def induction_closure(c: InductionConstants, p_check: int = 200, V: float = 1.0,
                      rel_tol: float = 1e-10, max_doublings: int = 200) -> ClosureResult:
    """Smallest ``Gamma`` (to ``rel_tol``) closing the induction for ``p = 1..p_check``.

    Doubling from ``Gamma = 1`` until feasible, then bisection; all bracket
    terms decrease in ``Gamma``, so feasibility is monotone.
    """
    if V < 1:
        raise ValueError("V must be at least 1")
    lo, hi = None, 1.0
    for _ in range(max_doublings):
        ok, _, _ = _feasible(c, hi, V, p_check)
        if ok:
            break
        lo, hi = hi, hi * 2
    else:
        return ClosureResult(None, V, "INFEASIBLE-at-budget", math.inf, math.inf, p_check)
    if lo is not None:
        while hi - lo > rel_tol * hi:
            mid = 0.5 * (lo + hi)
            if _feasible(c, mid, V, p_check)[0]:
                hi = mid
            else:
                lo = mid
    ok, mb, ratio = _feasible(c, hi, V, p_check)
    return ClosureResult(hi, V, "FEASIBLE" if ok else "INFEASIBLE-at-budget", mb, ratio, p_check)
