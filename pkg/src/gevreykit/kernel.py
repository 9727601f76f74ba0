"""Singular kernels ``K(x, y)`` and diagnostics for their structural assumptions.

Three families:

* ``fractional``: ``K0(y) = (c_{n,s}/2) |y|^{-(n+2s)}`` with the standard
  normalisation, so that ``integral delta u K0 = -(-Lap)^s u``;
* ``perturbed``: ``(1 + eps phi(x) psi(y/|y|)) K0(y)`` with smooth bounded
  ``phi`` and ``psi``; x-dependent and not symmetric in ``y``;
* ``custom``: any positive callable, derivatives unavailable.

Suprema over ``x`` in the unit ball and over ``y`` are sampled
(quasi-random points plus a local polish), never certified.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize
from scipy.stats import qmc

from .fields import FieldError, Gaussian, ScalarField, Trig, field_from_json
from .jets import JetPoly

__all__ = [
    "KernelError",
    "DegenerateFitError",
    "KernelSpec",
    "KernelCheckReport",
    "GrowthFit",
    "c_ns",
    "fractional_kernel",
    "perturbed_kernel",
    "custom_kernel",
    "kernel_from_json",
    "kernel_y_derivative",
    "check_K1",
    "estimate_Hk",
    "fractional_Hk",
    "fit_kernel_growth",
    "analyticity_fit",
    "check_kernel",
]

MAX_H_ORDER = 12


class KernelError(ValueError):
    pass


class DegenerateFitError(ValueError):
    pass


def c_ns(n: int, s: float) -> float:
    """Normalising constant of the fractional Laplacian in dimension ``n``."""
    return 4.0**s * s * math.gamma(n / 2 + s) / (math.pi ** (n / 2) * math.gamma(1 - s))


@dataclass(frozen=True)
class KernelSpec:
    n: int
    s: float
    kind: str = "fractional"
    eps: float = 0.0
    phi: ScalarField | None = None
    psi: ScalarField | None = None
    func: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.n not in (1, 2):
            raise KernelError("kernel dimension must be 1 or 2")
        if not 0.5 < self.s < 1:
            raise KernelError(f"s must lie strictly inside (1/2, 1), got {self.s}")
        if self.kind == "perturbed":
            if self.phi is None or self.psi is None:
                raise KernelError("perturbed kernel needs phi and psi")
            if self.phi.n != self.n or self.psi.n != self.n:
                raise KernelError("modulation fields must match the kernel dimension")
            if abs(self.eps) * self.phi.sup_bound * self.psi.sup_bound >= 1:
                raise KernelError("perturbation must satisfy |eps| sup|phi| sup|psi| < 1")
        elif self.kind == "custom":
            if self.func is None:
                raise KernelError("custom kernel needs an evaluator")
        elif self.kind != "fractional":
            raise KernelError(f"unknown kernel family {self.kind!r}")

    @property
    def c(self) -> float:
        return c_ns(self.n, self.s)

    @property
    def x_independent(self) -> bool:
        return self.kind == "fractional" or (self.kind == "perturbed" and self.eps == 0)

    @property
    def has_derivatives(self) -> bool:
        return self.kind != "custom"

    @property
    def homogeneous_part(self) -> float:
        """Constant ``a`` with ``K0(y) = a |y|^{-(n+2s)}``."""
        return 0.5 * self.c

    def k0(self, y) -> np.ndarray:
        r = _norm(y, self.n)
        return self.homogeneous_part * r ** (-(self.n + 2 * self.s))

    def angular_factor(self, x, omega) -> np.ndarray:
        """``1 + eps phi(x) psi(omega)`` for a unit direction ``omega``; 1 if unmodulated."""
        if self.kind != "perturbed" or self.eps == 0:
            shape = np.broadcast_shapes(_batch(x, self.n), _batch(omega, self.n))
            return np.ones(shape)
        return 1.0 + self.eps * self.phi(x) * self.psi(omega)

    def __call__(self, x, y) -> np.ndarray:
        if self.kind == "custom":
            return np.asarray(self.func(x, y), dtype=float)
        y = np.asarray(y, dtype=float)
        base = self.k0(y)
        if self.kind == "fractional" or self.eps == 0:
            return base
        r = _norm(y, self.n)
        omega = y / (r if self.n == 1 else r[..., None])
        return self.angular_factor(x, omega) * base

    def to_json(self) -> dict:
        out = {"family": self.kind, "n": self.n, "s": self.s}
        if self.kind == "perturbed":
            out.update(eps=self.eps, phi=self.phi.to_json(), psi=self.psi.to_json())
        return out


def _batch(z, n):
    z = np.asarray(z, dtype=float)
    return z.shape if n == 1 else z.shape[:-1]


def _norm(y, n):
    y = np.asarray(y, dtype=float)
    return np.abs(y) if n == 1 else np.sqrt(np.sum(y * y, axis=-1))


def fractional_kernel(n: int, s: float) -> KernelSpec:
    return KernelSpec(n, float(s), "fractional")


def perturbed_kernel(n: int, s: float, eps: float, phi=None, psi=None) -> KernelSpec:
    phi = phi if phi is not None else Gaussian(1.0, n)
    psi = psi if psi is not None else Trig(1.0, 0.5, n)
    return KernelSpec(n, float(s), "perturbed", float(eps), phi, psi)


def custom_kernel(n: int, s: float, func: Callable) -> KernelSpec:
    return KernelSpec(n, float(s), "custom", func=func)


def kernel_from_json(data: dict) -> KernelSpec:
    if not isinstance(data, dict):
        raise KernelError("kernel description must be a JSON object")
    missing = [k for k in ("family", "s") if k not in data]
    if missing:
        raise KernelError(f"kernel description lacks {', '.join(missing)}")
    fam = data["family"]
    n = int(data.get("n", 1))
    s = float(data["s"])
    if fam == "fractional":
        return fractional_kernel(n, s)
    if fam == "perturbed":
        try:
            phi = field_from_json(data["phi"]) if "phi" in data else None
            psi = field_from_json(data["psi"]) if "psi" in data else None
        except FieldError as exc:
            raise KernelError(str(exc)) from exc
        return perturbed_kernel(n, s, float(data.get("eps", 0.0)), phi, psi)
    raise KernelError(f"unknown or non-serialisable kernel family {fam!r}")


# ---------------------------------------------------------------------------
# derivatives


def _multi_indices(n, k):
    if n == 1:
        return [(k,)]
    return [(k - b, b) for b in range(k + 1)]


def _y_jets(K: KernelSpec, y, order):
    """Jets in ``y`` of ``K0`` and of ``psi(y/|y|) K0`` (the latter ``None`` if unmodulated)."""
    y = np.asarray(y, dtype=float)
    if K.n == 1:
        yb = y.reshape(-1)
        if np.any(yb == 0):
            raise KernelError("kernel derivatives are undefined at y = 0")
        Y = [JetPoly.variable(yb, 1.0, order)]
    else:
        yb = y.reshape(-1, 2)
        if np.any(np.all(yb == 0, axis=1)):
            raise KernelError("kernel derivatives are undefined at y = 0")
        Y = [
            JetPoly.variable(yb[:, 0], (1.0, 0.0), order, 2),
            JetPoly.variable(yb[:, 1], (0.0, 1.0), order, 2),
        ]
    r2 = Y[0] * Y[0]
    for yi in Y[1:]:
        r2 = r2 + yi * yi
    k0 = (r2 ** (-(K.n + 2 * K.s) / 2)) * K.homogeneous_part
    if K.kind != "perturbed" or K.eps == 0:
        return k0, None
    if K.n == 1:
        # y/|y| is locally constant away from the origin
        mod = k0 * K.psi(np.sign(yb))
    else:
        inv = r2**-0.5
        mod = K.psi.jet_of([yi * inv for yi in Y]) * k0
    return k0, mod


def _x_jet(K: KernelSpec, x, order):
    x = np.asarray(x, dtype=float)
    if K.n == 1:
        X = [JetPoly.variable(x.reshape(-1), 1.0, order)]
    else:
        xb = x.reshape(-1, 2)
        X = [
            JetPoly.variable(xb[:, 0], (1.0, 0.0), order, 2),
            JetPoly.variable(xb[:, 1], (0.0, 1.0), order, 2),
        ]
    return K.phi.jet_of(X)


def _as_index(theta, n):
    if isinstance(theta, (int, np.integer)):
        theta = (int(theta),) if n == 1 else (int(theta), 0)
    theta = tuple(int(t) for t in theta)
    if len(theta) != n or min(theta) < 0:
        raise KernelError(f"multi-index must have {n} non-negative entries")
    return theta


def kernel_derivative(K: KernelSpec, x, y, mu=0, theta=0) -> np.ndarray:
    """``D_x^mu D_y^theta K(x, y)`` via jets; vectorised over ``y`` (and ``x``)."""
    if not K.has_derivatives:
        if _as_index(mu, K.n) == (0,) * K.n and _as_index(theta, K.n) == (0,) * K.n:
            return K(x, y)
        raise KernelError("custom kernel: derivatives unchecked and unavailable")
    mu = _as_index(mu, K.n)
    theta = _as_index(theta, K.n)
    k0, mod = _y_jets(K, y, sum(theta))
    shape = _batch(y, K.n)
    base = k0.derivative(theta).reshape(shape)
    if mod is None:
        return base if sum(mu) == 0 else np.zeros(shape)
    dmod = mod.derivative(theta).reshape(shape)
    dphi = _x_jet(K, x, sum(mu)).derivative(mu).reshape(_batch(x, K.n))
    out = K.eps * dphi * dmod
    return out + base if sum(mu) == 0 else out


def kernel_y_derivative(K: KernelSpec, x, y, theta) -> np.ndarray:
    return kernel_derivative(K, x, y, 0, theta)


# ---------------------------------------------------------------------------
# sampling helpers


def _sobol(dim, count, seed):
    m = max(1, math.ceil(math.log2(max(count, 2))))
    return qmc.Sobol(dim, scramble=True, seed=seed).random_base2(m)[:count]


def _ball_points(u, n):
    """Map unit-cube samples (n columns) into the closed unit ball."""
    if n == 1:
        return 2 * u[:, 0] - 1
    rad = np.sqrt(u[:, 0])
    ang = 2 * math.pi * u[:, 1]
    return np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=-1)


def _directions(u, n):
    if n == 1:
        return np.where(u < 0.5, -1.0, 1.0)
    ang = 2 * math.pi * u
    return np.stack([np.cos(ang), np.sin(ang)], axis=-1)


def _polish(fun, starts, n, lo=-1.0, hi=1.0):
    """Local Nelder-Mead maximisation of ``fun`` from a few starting points."""
    best = -np.inf
    for x0 in starts:
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))

        def neg(z):
            if np.any(z < lo) or np.any(z > hi) or (n == 2 and lo == -1 and z @ z > 1):
                return np.inf
            return -fun(z if n == 2 else z[0])

        res = optimize.minimize(neg, x0, method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 400})
        best = max(best, -res.fun, fun(x0 if n == 2 else x0[0]))
    return best


# ---------------------------------------------------------------------------
# lower bound on the symmetrised kernel


def check_K1(K: KernelSpec, r0: float = 1.0, budget: int = 4096, seed: int = 0):
    """Sample ``|y|^{n+2s} K(x, y) / (2 - 2s)`` for ``x`` in ``B_1``, ``0 < |y| < r0``.

    Returns ``(a0, eta, verdict)`` with ``a0`` the midpoint and ``eta`` the
    half-width of the sampled range; ``verdict`` is ``"PASS"`` iff ``eta < a0/4``.
    """
    if not r0 > 0:
        raise KernelError("r0 must be positive")
    n = K.n
    u = _sobol(2 * n + 1, budget, seed)
    x = _ball_points(u[:, :n], n)
    rad = r0 * np.maximum(u[:, n], 1e-12)
    if n == 1:
        y = _directions(u[:, n + 1], 1) * rad
    else:
        y = _directions(u[:, n + 1], 2) * rad[:, None]
    scale = 1.0 / (2 - 2 * K.s)

    def ratio(xx, yy):
        return _norm(yy, n) ** (n + 2 * K.s) * np.asarray(K(xx, yy)) * scale

    vals = ratio(x, y)
    if np.any(~np.isfinite(vals)) or np.any(vals <= 0):
        raise KernelError("kernel produced non-positive or non-finite samples")
    hi, lo = float(vals.max()), float(vals.min())
    if hi > lo:
        # polish extremes over x with y frozen at the extreme sample
        for sign, idx in ((1, int(vals.argmax())), (-1, int(vals.argmin()))):
            yy = y[idx]
            val = sign * _polish(lambda z: sign * float(ratio(z, yy)), [x[idx]], n)
            hi, lo = max(hi, val), min(lo, val)
    a0 = float(0.5 * (hi + lo))
    eta = float(0.5 * (hi - lo))
    return a0, eta, "PASS" if eta < a0 / 4 else "FAIL"


# ---------------------------------------------------------------------------
# derivative integrals H_k and their growth


def fractional_Hk(n: int, s: float, k: int) -> float:
    """Closed form of ``H_k`` for the fractional kernel in one dimension."""
    if n != 1:
        raise KernelError("closed form available in one dimension only")
    return 0.5 * c_ns(1, s) * math.exp(math.lgamma(1 + 2 * s + k) - math.lgamma(1 + 2 * s))


def estimate_Hk(K: KernelSpec, k: int, budget: int = 512, seed: int = 0) -> float:
    """Sampled ``max |D_x^mu D_y^theta K| |y|^{n+2s+|theta|}`` over ``|mu| + |theta| = k``."""
    if not 0 <= k <= MAX_H_ORDER:
        raise KernelError(f"H_k is supported for k <= {MAX_H_ORDER}")
    if not K.has_derivatives:
        raise KernelError("custom kernel: derivatives unchecked and unavailable")
    n = K.n
    u = _sobol(n + 1, budget, seed)
    # log-uniform radii over four decades; directions cover the sphere
    rad = 10.0 ** (4 * u[:, 0] - 2)
    dirs = _directions(u[:, 1], n)
    y = dirs * rad if n == 1 else dirs * rad[:, None]
    ry = _norm(y, n)
    k0, mod = _y_jets(K, y, k)
    best = 0.0
    xsup = None
    if mod is not None:
        xs = _ball_points(_sobol(n, budget, seed + 1), n)
        xjet = _x_jet(K, xs, k)
        xsup = xs
    for kt in range(k + 1):
        km = k - kt
        w = ry ** (n + 2 * K.s + kt)
        for theta in _multi_indices(n, kt):
            d0 = k0.derivative(theta) * w
            if mod is None:
                if km == 0:
                    best = max(best, float(np.max(np.abs(d0))))
                continue
            dm = mod.derivative(theta) * w
            for mu in _multi_indices(n, km) if km else [(0,) * n]:
                if km == 0:
                    # linear in phi(x): extremes of phi suffice
                    ph = K.phi(xsup)
                    cand = [d0 + K.eps * ph.min() * dm, d0 + K.eps * ph.max() * dm]
                    best = max(best, float(max(np.max(np.abs(c)) for c in cand)))
                else:
                    dphi = np.abs(xjet.derivative(mu))
                    i0 = int(dphi.argmax())
                    fun = lambda z, mu=mu: abs(float(_x_jet(K, np.asarray(z), km).derivative(mu)[0]))
                    sup_phi = max(float(dphi.max()), _polish(fun, [xsup[i0]], n))
                    best = max(best, abs(K.eps) * sup_phi * float(np.max(np.abs(dm))))
    return best


@dataclass(frozen=True)
class GrowthFit:
    Lambda: float
    nu: float
    residual: float
    prefactor: float = 0.0  # exponent of the (k+1) power prefactor, if fitted
    intercept: float = 0.0


def fit_kernel_growth(H, prefactor: bool = True) -> GrowthFit:
    """Least-squares fit of ``log H_k`` against ``(1, k, log k!)``.

    With ``prefactor`` (default) an extra ``log(k+1)`` column absorbs power
    prefactors such as the ``k^{2s}`` in ``Gamma(1+2s+k)``; without it such a
    prefactor leaks into ``nu`` at small ``k``.
    """
    H = np.asarray(H, dtype=float)
    if H.size < 5:
        raise DegenerateFitError("need at least H_0..H_4")
    if np.any(~(H > 0)) or np.any(~np.isfinite(H)):
        raise DegenerateFitError("all H_k must be positive and finite")
    if np.all(H == H[0]):
        raise DegenerateFitError("all H_k equal: growth is undetermined")
    k = np.arange(H.size, dtype=float)
    cols = [np.ones_like(k), k, np.array([math.lgamma(q + 1) for q in k])]
    if prefactor:
        cols.append(np.log1p(k))
    A = np.stack(cols, axis=1)
    y = np.log(H)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return GrowthFit(
        Lambda=float(math.exp(coef[1])),
        nu=float(coef[2]),
        residual=res,
        prefactor=float(coef[3]) if prefactor else 0.0,
        intercept=float(coef[0]),
    )


def certified_lambda(H, nu: float) -> float:
    """Smallest ``Lambda`` with ``H_k <= Lambda^k (k!)^nu`` for every sampled ``k >= 1``."""
    H = np.asarray(H, dtype=float)
    nu = max(nu, 0.0)
    k = np.arange(1, H.size)
    lg = np.array([math.lgamma(q + 1) for q in k])
    return float(np.max(np.exp((np.log(H[1:]) - nu * lg) / k)))


def _sphere_sup(K: KernelSpec, j: int, count: int = 256) -> float:
    if K.n == 1:
        y = np.array([-1.0, 1.0])
    else:
        ang = 2 * math.pi * np.arange(count) / count
        y = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    k0, _ = _y_jets(fractional_kernel(K.n, K.s), y, j)
    return max(float(np.max(np.abs(k0.derivative(a)))) for a in _multi_indices(K.n, j))


def analyticity_fit(K: KernelSpec, jmax: int = 10):
    """Fit ``sup_{|y|=1} |D^alpha K0| <= C j! / R^j``; returns ``(C, R, ratios)``.

    ``C`` is tightened so the bound holds on every sampled ``j``; ``ratios``
    lists ``sup |D^alpha K0| R^j / j!`` for ``j = 0..jmax``.
    """
    sups = np.array([_sphere_sup(K, j) for j in range(jmax + 1)])
    j = np.arange(jmax + 1, dtype=float)
    lg = np.array([math.lgamma(q + 1) for q in j])
    A = np.stack([np.ones_like(j), -j], axis=1)
    coef, *_ = np.linalg.lstsq(A, np.log(sups) - lg, rcond=None)
    R = float(math.exp(coef[1]))
    ratios = sups * R**j / np.exp(lg)
    return float(ratios.max()), R, ratios


@dataclass(frozen=True)
class KernelCheckReport:
    a0: float
    eta: float
    r0: float
    H: tuple
    Lambda: float
    Lambda_fit: float
    nu: float
    residual: float
    K1: str
    K3: str
    sampled: bool = True

    def to_json(self) -> dict:
        return {
            "a0": self.a0,
            "eta": self.eta,
            "eta_limit": self.a0 / 4,
            "r0": self.r0,
            "H": list(self.H),
            "Lambda": self.Lambda,
            "Lambda_fit": self.Lambda_fit,
            "nu": self.nu,
            "residual": self.residual,
            "verdicts": {"K1": self.K1, "K3": self.K3},
            "note": "sampled, not certified" if self.sampled else "closed form",
        }


def check_kernel(K: KernelSpec, r0: float = 1.0, m: int = 10, budget: int = 4096,
                 seed: int = 0, fit_tolerance: float = 0.05) -> KernelCheckReport:
    """Run the lower-bound check (K1), sample ``H_0..H_m`` and fit their growth.

    The growth verdict (K3) passes when ``H_0 <= 1`` and the growth fit has
    RMS residual at most ``fit_tolerance``; the reported ``Lambda`` is the certified one (the bound
    holds exactly on every sampled ``k``).
    """
    a0, eta, v1 = check_K1(K, r0, budget, seed)
    H = [estimate_Hk(K, k, min(budget, 512), seed) for k in range(m + 1)]
    fit = fit_kernel_growth(H)
    lam = max(fit.Lambda, certified_lambda(H, fit.nu))
    v3 = "PASS" if H[0] <= 1 and fit.residual <= fit_tolerance else "FAIL"
    return KernelCheckReport(a0, eta, r0, tuple(H), lam, fit.Lambda, fit.nu, fit.residual, v1, v3)
