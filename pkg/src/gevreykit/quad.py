"""Evaluation of ``Lu(x) = integral delta u(x, y) K(x, y) dy``.

Writing ``y = r w`` and folding ``w`` with ``-w`` (``delta u`` is even in
``y``) reduces the integral to a weighted sum of radial integrals

    Lu(x) = sum_m beta_m  int_0^inf delta u(x, r w_m) r^{-1-2s} dr,

with ``beta_m = (c/2) (A(x, w_m) + A(x, -w_m)) dw``, where ``A`` is the
angular modulation of the kernel.  In one dimension there is a single
direction; in two, an equispaced half circle (trapezoid rule).

Each radial integral is split into three zones:

* ``r < rho``: the even Taylor terms of ``delta u`` up to order 4 are
  integrated exactly; the order-6 term bounds the remainder;
* ``rho <= r <= R_c``: adaptive Gauss-Kronrod (7/15) on log-spaced panels;
* ``r > R_c``: the ``-2 u(x)`` part in closed form plus, for decaying
  fields, the rest by the substitution ``r = R_c / t``; for merely bounded
  fields the rest is only bounded, by ``2 sup|u| R_c^{-2s} / (2s)``
  (constants are the exception: there the rest is known exactly).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .fields import ScalarField
from .jets import JetPoly
from .kernel import KernelError, KernelSpec, kernel_derivative
from .stencil import MultiStencil, build_stencil

__all__ = [
    "QuadratureError",
    "QuadratureConfig",
    "OperatorValue",
    "second_increment",
    "evaluate",
    "exterior_derivative_integral",
    "proint_convergence",
    "table_to_csv",
]


class QuadratureError(RuntimeError):
    pass


# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (positive half, centre last)
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_WKF = np.concatenate([_WK[:-1], _WK[::-1]])
_WGF = np.zeros(15)
_WGF[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk_adaptive(fun, a, b, tag, ntags, tol, max_panels):
    """Integrate ``fun(r, tag)`` over panels ``[a_i, b_i]``; sum results per tag.

    Panels whose Kronrod-Gauss difference exceeds their share of ``tol`` are
    bisected until the summed difference is below ``tol``.  Returns per-tag
    integrals and per-tag error estimates.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    tag = np.asarray(tag, dtype=np.int64)
    val = np.zeros(ntags)
    err = np.zeros(ntags)
    used = a.size
    while a.size:
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        r = mid[:, None] + half[:, None] * _NODES[None, :]
        fv = fun(r, tag)
        k = half * (fv @ _WKF)
        g = half * (fv @ _WGF)
        e = np.abs(k - g)
        if not np.all(np.isfinite(k)):
            raise QuadratureError("non-finite integrand value")
        budget = tol / max(used, 1)
        done = e <= budget
        if e.sum() <= tol:
            done[:] = True
        np.add.at(val, tag[done], k[done])
        np.add.at(err, tag[done], e[done])
        keep = ~done
        if not keep.any():
            break
        used += int(keep.sum())
        if used > max_panels:
            raise QuadratureError(
                f"tolerance {tol:g} not reached within {max_panels} panels"
            )
        a, b, tag = (
            np.concatenate([a[keep], mid[keep]]),
            np.concatenate([mid[keep], b[keep]]),
            np.concatenate([tag[keep], tag[keep]]),
        )
    return val, err


@dataclass(frozen=True)
class QuadratureConfig:
    rho: float = 1e-2
    R_c: float = 1e3
    tol: float = 1e-10
    max_subdivisions: int = 200_000
    tail_mode: str = "auto"  # auto | bound-only | mapped
    directions: int = 64  # half-circle directions in two dimensions
    panels_per_decade: int = 8

    def __post_init__(self):
        if not 0 < self.rho < self.R_c:
            raise ValueError("need 0 < rho < R_c")
        if not self.tol > 0:
            raise ValueError("panel tolerance must be positive")
        if self.tail_mode not in ("auto", "bound-only", "mapped"):
            raise ValueError(f"unknown tail mode {self.tail_mode!r}")
        if self.directions < 2:
            raise ValueError("need at least two directions")

    def to_json(self) -> dict:
        return {
            "rho": self.rho,
            "R_c": self.R_c,
            "tol": self.tol,
            "max_subdivisions": self.max_subdivisions,
            "tail_mode": self.tail_mode,
            "directions": self.directions,
            "panels_per_decade": self.panels_per_decade,
        }


@dataclass(frozen=True)
class OperatorValue:
    value: float
    inner: float
    middle: float
    tail: float
    inner_bound: float
    middle_bound: float
    tail_bound: float
    angular_bound: float = 0.0

    @property
    def error_bound(self) -> float:
        return self.inner_bound + self.middle_bound + self.tail_bound + self.angular_bound

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "contributions": {"inner": self.inner, "middle": self.middle, "tail": self.tail},
            "bounds": {
                "inner": self.inner_bound,
                "middle": self.middle_bound,
                "tail": self.tail_bound,
                "angular": self.angular_bound,
            },
            "error_bound": self.error_bound,
        }


def second_increment(u: ScalarField, x, y) -> np.ndarray:
    """``u(x + y) + u(x - y) - 2 u(x)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return u(x + y) + u(x - y) - 2 * u(x)


def _directions(K: KernelSpec, x, cfg: QuadratureConfig):
    """Folded directions ``w_m`` (rows) and weights ``beta_m``."""
    a = K.homogeneous_part
    if K.n == 1:
        w = np.array([[1.0]])
        A = K.angular_factor(x, 1.0) + K.angular_factor(x, -1.0)
        return w, np.array([a * float(A)])
    M = cfg.directions
    th = math.pi * np.arange(M) / M
    w = np.stack([np.cos(th), np.sin(th)], axis=-1)
    xx = np.broadcast_to(np.asarray(x, dtype=float), (M, 2))
    A = K.angular_factor(xx, w) + K.angular_factor(xx, -w)
    return w, a * A * (math.pi / M)


def _point(x, n):
    x = np.asarray(x, dtype=float)
    if (n == 1 and x.ndim != 0) or (n == 2 and x.shape != (2,)):
        raise ValueError(f"evaluate takes a single point in R^{n}")
    return x


def _directional_jets(u: ScalarField, base, w, order):
    """Jets of ``t -> u(base_m + t w_m)``; ``base`` and ``w`` have one row per direction."""
    X = []
    for i in range(u.n):
        xi = JetPoly.variable(np.ascontiguousarray(base[:, i]), 1.0, order)
        xi.c[1] = w[:, i]
        X.append(xi)
    return u.jet_of(X)


def evaluate(u: ScalarField, K: KernelSpec, x, cfg: QuadratureConfig | None = None) -> OperatorValue:
    """Three-zone evaluation of the operator at a single point ``x``."""
    cfg = cfg or QuadratureConfig()
    if K.kind == "custom":
        raise KernelError("custom kernels are not supported by the zoned scheme")
    if u.n != K.n:
        raise ValueError("field and kernel dimensions differ")
    n, s = K.n, K.s
    x = _point(x, n)
    w, beta = _directions(K, x, cfg)
    M = w.shape[0]
    ux = float(u(x))
    rho, Rc = cfg.rho, cfg.R_c

    # inner zone: exact even moments up to order 4, order-6 term as remainder
    xrow = np.broadcast_to(np.atleast_1d(x), (M, n))
    jets = _directional_jets(u, xrow, w, 6)
    inner_r = np.zeros(M)
    for j in (2, 4):
        inner_r += 2 * jets.c[j] * rho ** (j - 2 * s) / (j - 2 * s)
    # remainder: sampled sup of the sixth Taylor coefficient over the inner segment
    a6 = np.abs(jets.c[6])
    for t in (-1.0, -0.5, 0.5, 1.0):
        a6 = np.maximum(a6, np.abs(_directional_jets(u, xrow + t * rho * w, w, 6).c[6]))
    inner_err = 2 * a6 * rho ** (6 - 2 * s) / (6 - 2 * s)
    if not np.all(np.isfinite(inner_r)):
        raise QuadratureError("non-finite jet in the inner zone")

    def delta(r, tag):
        if n == 1:
            return u(x + r) + u(x - r) - 2 * ux
        off = r[..., None] * w[tag][:, None, :]
        return u(x + off) + u(x - off) - 2 * ux

    # middle zone
    decades = math.log10(Rc / rho)
    npan = max(1, math.ceil(decades * cfg.panels_per_decade))
    edges = rho * (Rc / rho) ** (np.arange(npan + 1) / npan)
    a = np.tile(edges[:-1], M)
    b = np.tile(edges[1:], M)
    tag = np.repeat(np.arange(M), npan)
    scale = float(np.max(np.abs(beta))) or 1.0
    tol = cfg.tol / scale

    def mid_fun(r, tg):
        return delta(r, tg) * r ** (-1 - 2 * s)

    mid_r, mid_e = _gk_adaptive(mid_fun, a, b, tag, M, tol, cfg.max_subdivisions)

    # tail zone
    tail_exact = -2 * ux * Rc ** (-2 * s) / (2 * s)
    dec = u.decay
    mode = cfg.tail_mode
    if mode == "auto":
        mode = "mapped" if dec.decaying else "bound-only"
    if dec.kind == "unbounded":
        raise QuadratureError("field grows at infinity; the operator integral diverges")
    xnorm = float(np.sqrt(np.sum(x * x)))
    if dec.kind == "compact" and Rc >= xnorm + dec.rate:
        tail_r, tail_e = np.zeros(M), np.zeros(M)
    elif getattr(u, "degree", None) == 0:
        # constant field: the rest of the tail cancels the -2 u(x) part exactly
        tail_r, tail_e = np.full(M, -tail_exact), np.zeros(M)
    elif mode == "mapped":
        if not dec.decaying:
            raise QuadratureError("mapped tail quadrature needs a decaying field")

        def tail_fun(t, tg):
            r = Rc / np.maximum(t, 1e-300)
            if n == 1:
                g = u(x + r) + u(x - r)
            else:
                off = r[..., None] * w[tg][:, None, :]
                g = u(x + off) + u(x - off)
            return np.where(t > 0, g * t ** (2 * s - 1), 0.0) * Rc ** (-2 * s)

        ta = np.tile(np.array([0.0, 0.25, 0.5]), M)
        tb = np.tile(np.array([0.25, 0.5, 1.0]), M)
        ttag = np.repeat(np.arange(M), 3)
        tail_r, tail_e = _gk_adaptive(tail_fun, ta, tb, ttag, M, tol, cfg.max_subdivisions)
    else:
        tail_r = np.zeros(M)
        tail_e = np.full(M, 2 * u.sup_bound * Rc ** (-2 * s) / (2 * s))

    inner = float(beta @ inner_r)
    middle = float(beta @ mid_r)
    tail = float(beta @ (tail_r + tail_exact))
    ab = np.abs(beta)
    ang = 0.0
    if n == 2:
        per_dir = inner_r + mid_r + tail_r + tail_exact
        coarse = 2 * float(beta[::2] @ per_dir[::2])
        ang = abs(coarse - (inner + middle + tail))
    return OperatorValue(
        value=inner + middle + tail,
        inner=inner,
        middle=middle,
        tail=tail,
        inner_bound=float(ab @ inner_err),
        middle_bound=float(ab @ mid_e),
        tail_bound=float(ab @ tail_e),
        angular_bound=ang,
    )


# ---------------------------------------------------------------------------
# exterior integrals of kernel derivatives


def _gamma_index(gamma, n):
    if isinstance(gamma, (int, np.integer)):
        gamma = (int(gamma),) if n == 1 else (int(gamma), 0)
    gamma = tuple(int(g) for g in gamma)
    if len(gamma) != n or min(gamma) < 0:
        raise ValueError(f"multi-index must have {n} non-negative entries")
    return gamma


def _exterior_numeric(K, g, r, x, tol, directions=256):
    """``int_{|y| > r} g(x, y) dy`` for ``g`` decaying faster than ``|y|^{-n}``."""
    n = K.n
    if n == 1:
        dirs = np.array([[1.0], [-1.0]])
        wts = np.array([1.0, 1.0])
    else:
        th = 2 * math.pi * (np.arange(directions) + 0.5) / directions
        dirs = np.stack([np.cos(th), np.sin(th)], axis=-1)
        wts = np.full(directions, 2 * math.pi / directions)
    M = dirs.shape[0]

    def fun(t, tg):
        # y = (r / t) w, dy = r t^{-2} (r/t)^{n-1} dt dw
        rr = r / np.maximum(t, 1e-300)
        y = rr[..., None] * dirs[tg][:, None, :]
        if n == 1:
            y = y[..., 0]
        vals = g(x, y) * rr ** (n - 1) * r / np.maximum(t, 1e-300) ** 2
        return np.where(t > 0, vals, 0.0)

    a = np.tile(np.array([0.0, 0.125, 0.25, 0.5]), M)
    b = np.tile(np.array([0.125, 0.25, 0.5, 1.0]), M)
    tag = np.repeat(np.arange(M), 4)
    val, err = _gk_adaptive(fun, a, b, tag, M, tol, 400_000)
    return float(wts @ val), float(wts @ err)


def exterior_derivative_integral(K: KernelSpec, gamma, r: float, x=None,
                                 numeric: bool = False, tol: float = 1e-12) -> float:
    """``int_{|y| > r} |D_y^gamma K(x, y)| dy``; closed form for the 1-d fractional kernel."""
    if not r > 0:
        raise ValueError("radius must be positive")
    gamma = _gamma_index(gamma, K.n)
    order = sum(gamma)
    if K.n + 2 * K.s + order <= K.n:
        raise QuadratureError("exterior integral diverges")
    x = np.zeros(K.n) if x is None else np.asarray(x, dtype=float)
    if K.n == 1:
        x = x.reshape(())
    if K.kind == "fractional" and K.n == 1 and not numeric:
        prod = math.exp(math.lgamma(1 + 2 * K.s + order) - math.lgamma(1 + 2 * K.s))
        return 2 * K.homogeneous_part * prod * r ** (-2 * K.s - order) / (2 * K.s + order)

    def g(xx, y):
        return np.abs(kernel_derivative(K, xx, y, 0, gamma))

    val, _ = _exterior_numeric(K, g, r, x, tol)
    return val


def _quotient_offsets(gamma, n):
    """Unit offsets and weights of the composite quotient of multi-index ``gamma``."""
    if n == 1:
        st = build_stencil(gamma[0])
        return np.array(st.nodes, dtype=float)[:, None], st.float_coefficients
    factors = []
    for axis, k in enumerate(gamma):
        if k:
            e = [0.0] * n
            e[axis] = 1.0
            factors.append((tuple(e), k))
    if not factors:
        return np.zeros((1, n)), np.ones(1)
    return MultiStencil(tuple(factors)).flattened()


def proint_convergence(K: KernelSpec, gamma, r: float, hs, x=None, tol: float = 1e-11):
    """Rows ``(h, lhs, rhs, ratio)`` comparing exterior integrals of quotients and derivatives.

    ``lhs(h) = int_{|y|>r} |T_h^gamma K(x, y)| h^{-|gamma|} dy`` with the quotient
    taken in ``y``; requires ``h (|gamma| + 1) < r`` so the stencil footprint
    stays away from the singularity.
    """
    gamma = _gamma_index(gamma, K.n)
    order = sum(gamma)
    x = np.zeros(K.n) if x is None else np.asarray(x, dtype=float)
    if K.n == 1:
        x = x.reshape(())
    rhs = exterior_derivative_integral(K, gamma, r, x)
    offs, wts = _quotient_offsets(gamma, K.n)
    rows = []
    for h in hs:
        h = float(h)
        if not h > 0:
            raise ValueError("steps must be positive")
        if h * (order + 1) >= r:
            raise ValueError(f"step {h:g} too large: need h(|gamma|+1) < r")

        def g(xx, y, h=h):
            acc = 0.0
            for off, c in zip(offs, wts):
                yy = y + h * (off[0] if K.n == 1 else off)
                acc = acc + c * K(xx, yy)
            return np.abs(acc) / h**order

        lhs, _ = _exterior_numeric(K, g, r, x, tol)
        rows.append((h, lhs, rhs, lhs / rhs))
    return rows


def table_to_csv(rows, header=("h", "lhs", "rhs", "ratio")) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for row in rows:
        wr.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()
