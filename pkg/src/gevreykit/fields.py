"""Manufactured scalar fields with exact high-order derivatives.

Each field evaluates pointwise with plain numpy and, separately, maps a tuple
of coordinate jets to the jet of its value.  Feeding the coordinate jets
``x_i + v_i t`` gives directional Taylor coefficients; feeding
``y_i + t_i`` (two formal variables) gives mixed partials in the plane.

Points are passed as arrays: in one dimension any array of coordinates, in two
dimensions an array whose last axis has length 2.

Fields are immutable and can be described by a small JSON tree::

    {"kind": "sum", "children": [{"kind": "trig", "params": {"omega": 2}},
                                 {"kind": "gaussian", "params": {"alpha": 1}}]}
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from .jets import JetPoly

__all__ = [
    "Decay",
    "ScalarField",
    "FieldError",
    "JetUnavailableError",
    "Trig",
    "Exp",
    "Gaussian",
    "Lorentzian",
    "FlatBump",
    "Polynomial",
    "Sum",
    "Product",
    "Scale",
    "Shift",
    "FracGaussian",
    "CallableField",
    "make_field",
    "field_from_json",
    "jet",
    "derivative",
    "manufactured_pair",
    "MAX_JET_ORDER",
]

MAX_JET_ORDER = 24


class FieldError(ValueError):
    """Invalid field parameters or description."""


class JetUnavailableError(ValueError):
    """Raised when a jet is requested where the field is not known to be smooth."""


@dataclass(frozen=True)
class Decay:
    """How fast a field decays at infinity.

    ``kind`` is one of ``"bounded-only"``, ``"gaussian-like"`` (``rate`` is the
    exponent ``a`` in ``exp(-a|x|^2)``), ``"algebraic"`` (``rate`` is the
    power), ``"compact"`` (``rate`` is the support radius) or ``"unbounded"``.
    """

    kind: str
    rate: float = 0.0

    @property
    def decaying(self) -> bool:
        return self.kind in ("gaussian-like", "algebraic", "compact")

    def to_json(self) -> dict:
        return {"kind": self.kind, "rate": self.rate}


_BOUNDED = Decay("bounded-only")
_UNBOUNDED = Decay("unbounded")


def _coords(x, n: int):
    arr = np.asarray(x, dtype=float)
    if n == 1:
        return [arr], arr.shape
    if arr.shape[-1:] != (n,):
        raise FieldError(f"points for a {n}-d field need a trailing axis of length {n}")
    return [arr[..., i] for i in range(n)], arr.shape[:-1]


def _sqnorm(X):
    acc = X[0] * X[0]
    for xi in X[1:]:
        acc = acc + xi * xi
    return acc


class ScalarField:
    """Base class: a smooth function on R^n with jets, a sup bound and a decay."""

    n: int
    kind: str = "field"

    # subclasses implement these two
    def _eval(self, X):
        raise NotImplementedError

    def _jet(self, X):
        raise JetUnavailableError(f"{self.kind} field has no jet support")

    @property
    def sup_bound(self) -> float:
        raise NotImplementedError

    @property
    def decay(self) -> Decay:
        return _BOUNDED

    def params(self) -> dict:
        return {}

    def children(self) -> tuple:
        return ()

    def __call__(self, x):
        X, shape = _coords(x, self.n)
        return np.asarray(self._eval(X), dtype=float).reshape(shape)

    def eval_mp(self, x, dps: int = 50):
        """Value at one point in arbitrary precision (``x`` a number or a pair)."""
        import mpmath

        with mpmath.workdps(dps):
            pts = [mpmath.mpf(x)] if self.n == 1 else [mpmath.mpf(a) for a in x]
            return _mp_eval(self, pts, mpmath)

    def jet_of(self, X) -> JetPoly:
        """Jet of the field composed with the coordinate jets ``X``."""
        if len(X) != self.n:
            raise FieldError(f"expected {self.n} coordinate jets, got {len(X)}")
        return self._jet(list(X))

    def to_json(self) -> dict:
        out = {"kind": self.kind, "params": dict(self.params())}
        kids = self.children()
        if kids:
            out["children"] = [c.to_json() for c in kids]
        return out

    def __add__(self, other):
        return Sum((self, other))

    def __mul__(self, other):
        if isinstance(other, ScalarField):
            return Product((self, other))
        return Scale(float(other), self)

    __rmul__ = __mul__

    def __neg__(self):
        return Scale(-1.0, self)

    def __sub__(self, other):
        return Sum((self, -other))


def _check_n(n):
    if n not in (1, 2):
        raise FieldError(f"dimension must be 1 or 2, got {n}")
    return n


def _vec(v, n, name):
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.size == 1 and n > 1:
        arr = np.array([float(arr[0])] + [0.0] * (n - 1))
    if arr.shape != (n,):
        raise FieldError(f"{name} must have {n} components")
    if not np.all(np.isfinite(arr)):
        raise FieldError(f"{name} must be finite")
    return tuple(float(a) for a in arr)


def _finite(v, name):
    v = float(v)
    if not math.isfinite(v):
        raise FieldError(f"{name} must be finite")
    return v


@dataclass(frozen=True)
class Trig(ScalarField):
    """``cos(omega . x + phase)``."""

    omega: tuple = (1.0,)
    phase: float = 0.0
    n: int = 1
    kind = "trig"

    def __post_init__(self):
        _check_n(self.n)
        object.__setattr__(self, "omega", _vec(self.omega, self.n, "omega"))
        object.__setattr__(self, "phase", _finite(self.phase, "phase"))

    def _eval(self, X):
        arg = self.phase + sum(w * xi for w, xi in zip(self.omega, X))
        return np.cos(arg)

    def _jet(self, X):
        arg = X[0] * self.omega[0]
        for w, xi in zip(self.omega[1:], X[1:]):
            arg = arg + xi * w
        return (arg + self.phase).cos()

    @property
    def sup_bound(self):
        return 1.0

    def params(self):
        om = self.omega[0] if self.n == 1 else list(self.omega)
        return {"omega": om, "phase": self.phase, "n": self.n}


@dataclass(frozen=True)
class Exp(ScalarField):
    """``exp(rate . x)``; unbounded unless the rate vanishes."""

    rate: tuple = (1.0,)
    n: int = 1
    kind = "exp"

    def __post_init__(self):
        _check_n(self.n)
        object.__setattr__(self, "rate", _vec(self.rate, self.n, "rate"))

    def _eval(self, X):
        return np.exp(sum(a * xi for a, xi in zip(self.rate, X)))

    def _jet(self, X):
        arg = X[0] * self.rate[0]
        for a, xi in zip(self.rate[1:], X[1:]):
            arg = arg + xi * a
        return arg.exp()

    @property
    def sup_bound(self):
        return 1.0 if not any(self.rate) else math.inf

    @property
    def decay(self):
        return _BOUNDED if not any(self.rate) else _UNBOUNDED

    def params(self):
        r = self.rate[0] if self.n == 1 else list(self.rate)
        return {"rate": r, "n": self.n}


@dataclass(frozen=True)
class Gaussian(ScalarField):
    """``exp(-alpha |x|^2)``."""

    alpha: float = 1.0
    n: int = 1
    kind = "gaussian"

    def __post_init__(self):
        _check_n(self.n)
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise FieldError("gaussian alpha must be positive and finite")

    def _eval(self, X):
        return np.exp(-self.alpha * sum(xi * xi for xi in X))

    def _jet(self, X):
        return (_sqnorm(X) * (-self.alpha)).exp()

    @property
    def sup_bound(self):
        return 1.0

    @property
    def decay(self):
        return Decay("gaussian-like", self.alpha)

    def params(self):
        return {"alpha": self.alpha, "n": self.n}


@dataclass(frozen=True)
class Lorentzian(ScalarField):
    """``1 / (1 + |x|^2 / width^2)``."""

    width: float = 1.0
    n: int = 1
    kind = "lorentzian"

    def __post_init__(self):
        _check_n(self.n)
        if not (math.isfinite(self.width) and self.width > 0):
            raise FieldError("lorentzian width must be positive and finite")

    def _eval(self, X):
        return 1.0 / (1.0 + sum(xi * xi for xi in X) / self.width**2)

    def _jet(self, X):
        return 1.0 / (_sqnorm(X) * (1.0 / self.width**2) + 1.0)

    @property
    def sup_bound(self):
        return 1.0

    @property
    def decay(self):
        return Decay("algebraic", 2.0)

    def params(self):
        return {"width": self.width, "n": self.n}


@dataclass(frozen=True)
class FlatBump(ScalarField):
    """``exp(-1 / (1 - |x|^2))`` in the unit ball, zero outside.

    C-infinity everywhere but not analytic on the unit sphere.
    """

    n: int = 1
    kind = "flat_bump"

    def __post_init__(self):
        _check_n(self.n)

    def _eval(self, X):
        q = 1.0 - sum(xi * xi for xi in X)
        inside = q > 0
        safe = np.where(inside, q, 1.0)
        return np.where(inside, np.exp(-1.0 / safe), 0.0)

    def _jet(self, X):
        q = 1.0 - _sqnorm(X)
        inside = q.c[0] > 0
        q.c[0] = np.where(inside, q.c[0], 1.0)
        out = (-1.0 / q).exp()
        out.c = np.where(inside[None, :], out.c, 0.0)
        return out

    @property
    def sup_bound(self):
        return math.exp(-1.0)

    @property
    def decay(self):
        return Decay("compact", 1.0)

    def params(self):
        return {"n": self.n}


@dataclass(frozen=True)
class Polynomial(ScalarField):
    """``sum_k c_k x^k`` (1-d) or ``sum_ij c_ij x^i y^j`` (2-d, nested lists)."""

    coeffs: tuple = (0.0,)
    n: int = 1
    kind = "polynomial"

    def __post_init__(self):
        _check_n(self.n)
        arr = np.asarray(self.coeffs, dtype=float)
        if arr.ndim != self.n or arr.size == 0:
            raise FieldError(f"polynomial coefficients must be a {self.n}-d array")
        if not np.all(np.isfinite(arr)):
            raise FieldError("polynomial coefficients must be finite")
        object.__setattr__(self, "coeffs", _freeze(arr))

    @property
    def _arr(self):
        return np.asarray(self.coeffs, dtype=float)

    @property
    def degree(self) -> int:
        arr = self._arr
        nz = np.argwhere(arr != 0)
        return int(nz.sum(axis=1).max()) if nz.size else 0

    def _eval(self, X):
        arr = self._arr
        if self.n == 1:
            return np.polynomial.polynomial.polyval(X[0], arr)
        return np.polynomial.polynomial.polyval2d(X[0], X[1], arr)

    def _jet(self, X):
        arr = self._arr
        if self.n == 1:
            acc = X[0] * 0.0 + arr[-1]
            for c in arr[-2::-1]:
                acc = acc * X[0] + c
            return acc
        # Horner in y for each x-power, then Horner in x
        rows = []
        for i in range(arr.shape[0]):
            acc = X[1] * 0.0 + arr[i, -1]
            for c in arr[i, -2::-1]:
                acc = acc * X[1] + c
            rows.append(acc)
        acc = rows[-1]
        for r in rows[-2::-1]:
            acc = acc * X[0] + r
        return acc

    @property
    def sup_bound(self):
        return abs(float(self._arr.flat[0])) if self.degree == 0 else math.inf

    @property
    def decay(self):
        return _BOUNDED if self.degree == 0 else _UNBOUNDED

    def params(self):
        return {"coeffs": self._arr.tolist(), "n": self.n}


def _freeze(arr):
    if arr.ndim == 1:
        return tuple(float(a) for a in arr)
    return tuple(_freeze(a) for a in arr)


def _same_dim(children):
    ns = {c.n for c in children}
    if len(ns) != 1:
        raise FieldError("children must share one dimension")
    return ns.pop()


@dataclass(frozen=True)
class Sum(ScalarField):
    terms: tuple = ()
    kind = "sum"

    def __post_init__(self):
        if not self.terms:
            raise FieldError("sum needs at least one child")
        object.__setattr__(self, "terms", tuple(self.terms))

    @property
    def n(self):
        return _same_dim(self.terms)

    def _eval(self, X):
        return sum(t._eval(X) for t in self.terms)

    def _jet(self, X):
        acc = self.terms[0]._jet(X)
        for t in self.terms[1:]:
            acc = acc + t._jet(X)
        return acc

    @property
    def sup_bound(self):
        return float(sum(t.sup_bound for t in self.terms))

    @property
    def decay(self):
        decs = [t.decay for t in self.terms]
        for kind in ("unbounded", "bounded-only"):
            if any(d.kind == kind for d in decs):
                return Decay(kind)
        if any(d.kind == "algebraic" for d in decs):
            return Decay("algebraic", min(d.rate for d in decs if d.kind == "algebraic"))
        if any(d.kind == "gaussian-like" for d in decs):
            return Decay("gaussian-like", min(d.rate for d in decs if d.kind == "gaussian-like"))
        return Decay("compact", max(d.rate for d in decs))

    def children(self):
        return self.terms


@dataclass(frozen=True)
class Product(ScalarField):
    factors: tuple = ()
    kind = "product"

    def __post_init__(self):
        if not self.factors:
            raise FieldError("product needs at least one child")
        object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def n(self):
        return _same_dim(self.factors)

    def _eval(self, X):
        out = self.factors[0]._eval(X)
        for f in self.factors[1:]:
            out = out * f._eval(X)
        return out

    def _jet(self, X):
        acc = self.factors[0]._jet(X)
        for f in self.factors[1:]:
            acc = acc * f._jet(X)
        return acc

    @property
    def sup_bound(self):
        bounds = [f.sup_bound for f in self.factors]
        if any(b == 0 for b in bounds):
            return 0.0
        return float(math.prod(bounds))

    @property
    def decay(self):
        decs = [f.decay for f in self.factors]
        if any(d.kind == "unbounded" for d in decs):
            return _UNBOUNDED
        for kind in ("compact", "gaussian-like"):
            rel = [d for d in decs if d.kind == kind]
            if rel:
                pick = min if kind == "compact" else max
                return Decay(kind, pick(d.rate for d in rel))
        alg = [d.rate for d in decs if d.kind == "algebraic"]
        if alg:
            return Decay("algebraic", sum(alg))
        return _BOUNDED

    def children(self):
        return self.factors


@dataclass(frozen=True)
class Scale(ScalarField):
    factor: float = 1.0
    base: ScalarField = None
    kind = "scale"

    def __post_init__(self):
        if self.base is None:
            raise FieldError("scale needs one child")
        object.__setattr__(self, "factor", _finite(self.factor, "factor"))

    @property
    def n(self):
        return self.base.n

    def _eval(self, X):
        return self.factor * self.base._eval(X)

    def _jet(self, X):
        return self.base._jet(X) * self.factor

    @property
    def sup_bound(self):
        return abs(self.factor) * self.base.sup_bound if self.factor else 0.0

    @property
    def decay(self):
        return self.base.decay

    def params(self):
        return {"factor": self.factor}

    def children(self):
        return (self.base,)


@dataclass(frozen=True)
class Shift(ScalarField):
    """``x -> base(x + offset)``."""

    offset: tuple = (0.0,)
    base: ScalarField = None
    kind = "shift"

    def __post_init__(self):
        if self.base is None:
            raise FieldError("shift needs one child")
        object.__setattr__(self, "offset", _vec(self.offset, self.base.n, "offset"))

    @property
    def n(self):
        return self.base.n

    def _eval(self, X):
        return self.base._eval([xi + a for xi, a in zip(X, self.offset)])

    def _jet(self, X):
        return self.base._jet([xi + a for xi, a in zip(X, self.offset)])

    @property
    def sup_bound(self):
        return self.base.sup_bound

    @property
    def decay(self):
        return self.base.decay

    def params(self):
        off = self.offset[0] if self.n == 1 else list(self.offset)
        return {"offset": off}

    def children(self):
        return (self.base,)


def _frac_gaussian_scale(alpha, s, n):
    return alpha**s * 4.0**s * math.gamma(n / 2 + s) / math.gamma(n / 2)


@dataclass(frozen=True)
class FracGaussian(ScalarField):
    """``-(-Laplacian)^s exp(-alpha |x|^2)`` in closed form.

    Uses ``(-Lap)^s e^{-a|x|^2} = a^s 4^s Gamma(n/2+s)/Gamma(n/2)
    1F1(n/2+s; n/2; -a|x|^2)``; jets compose the z-Taylor series of 1F1 with
    the jet of ``z = -a|x|^2``.
    """

    alpha: float = 1.0
    s: float = 0.75
    n: int = 1
    kind = "frac_gaussian"

    def __post_init__(self):
        _check_n(self.n)
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise FieldError("alpha must be positive and finite")
        if not 0 < self.s < 1:
            raise FieldError("s must lie in (0, 1)")

    def _eval(self, X):
        z = -self.alpha * sum(xi * xi for xi in X)
        a, b = self.n / 2 + self.s, self.n / 2
        return -_frac_gaussian_scale(self.alpha, self.s, self.n) * special.hyp1f1(a, b, z)

    def _jet(self, X):
        z = _sqnorm(X) * (-self.alpha)
        z0 = z.c[0]
        a, b = self.n / 2 + self.s, self.n / 2
        m = z.order
        series = np.empty((m + 1, z0.size))
        ratio = 1.0
        for q in range(m + 1):
            # d^q/dz^q 1F1(a;b;z) = (a)_q/(b)_q 1F1(a+q;b+q;z)
            series[q] = ratio / math.factorial(q) * special.hyp1f1(a + q, b + q, z0)
            ratio *= (a + q) / (b + q)
        return z.compose(series) * (-_frac_gaussian_scale(self.alpha, self.s, self.n))

    @property
    def sup_bound(self):
        return _frac_gaussian_scale(self.alpha, self.s, self.n)

    @property
    def decay(self):
        return Decay("algebraic", self.n + 2 * self.s)

    def params(self):
        return {"alpha": self.alpha, "s": self.s, "n": self.n}


@dataclass(frozen=True)
class CallableField(ScalarField):
    """Wrap a plain vectorised callable; no jets, user-declared sup bound."""

    func: Callable = None
    n: int = 1
    bound: float = math.inf
    decay_info: Decay = field(default=_BOUNDED)
    kind = "callable"

    def _eval(self, X):
        if self.n == 1:
            return self.func(X[0])
        return self.func(np.stack(X, axis=-1))

    @property
    def sup_bound(self):
        return self.bound

    @property
    def decay(self):
        return self.decay_info

    def to_json(self):
        raise FieldError("callable fields cannot be serialized")


def _mp_eval(u, X, mp):
    """Arbitrary-precision evaluation of the builtin kinds."""
    if isinstance(u, Trig):
        return mp.cos(u.phase + mp.fsum(w * xi for w, xi in zip(u.omega, X)))
    if isinstance(u, Exp):
        return mp.exp(mp.fsum(a * xi for a, xi in zip(u.rate, X)))
    if isinstance(u, Gaussian):
        return mp.exp(-u.alpha * mp.fsum(xi * xi for xi in X))
    if isinstance(u, Lorentzian):
        return 1 / (1 + mp.fsum(xi * xi for xi in X) / mp.mpf(u.width) ** 2)
    if isinstance(u, FlatBump):
        q = 1 - mp.fsum(xi * xi for xi in X)
        return mp.exp(-1 / q) if q > 0 else mp.mpf(0)
    if isinstance(u, Polynomial):
        arr = u._arr
        if u.n == 1:
            return mp.fsum(c * X[0] ** k for k, c in enumerate(arr))
        return mp.fsum(arr[i, j] * X[0] ** i * X[1] ** j
                       for i in range(arr.shape[0]) for j in range(arr.shape[1]))
    if isinstance(u, Sum):
        return mp.fsum(_mp_eval(t, X, mp) for t in u.terms)
    if isinstance(u, Product):
        return mp.fprod(_mp_eval(t, X, mp) for t in u.factors)
    if isinstance(u, Scale):
        return u.factor * _mp_eval(u.base, X, mp)
    if isinstance(u, Shift):
        return _mp_eval(u.base, [xi + a for xi, a in zip(X, u.offset)], mp)
    if isinstance(u, FracGaussian):
        z = -u.alpha * mp.fsum(xi * xi for xi in X)
        a, b = mp.mpf(u.n) / 2 + u.s, mp.mpf(u.n) / 2
        scale = u.alpha**u.s * 4**u.s * mp.gamma(a) / mp.gamma(b)
        return -scale * mp.hyp1f1(a, b, z)
    raise FieldError(f"{u.kind} field has no arbitrary-precision evaluator")


# ---------------------------------------------------------------------------
# construction


def make_field(kind: str, params: dict | None = None, children=()) -> ScalarField:
    """Build a builtin field from its kind name and parameters."""
    p = dict(params or {})
    n = int(p.pop("n", children[0].n if children else 1))
    try:
        if kind == "trig":
            return Trig(p.pop("omega", 1.0), p.pop("phase", 0.0), n)
        if kind == "exp":
            return Exp(p.pop("rate", 1.0), n)
        if kind == "gaussian":
            return Gaussian(float(p.pop("alpha", 1.0)), n)
        if kind == "lorentzian":
            return Lorentzian(float(p.pop("width", 1.0)), n)
        if kind == "flat_bump":
            return FlatBump(n)
        if kind == "polynomial":
            return Polynomial(p.pop("coeffs"), n)
        if kind == "frac_gaussian":
            return FracGaussian(float(p.pop("alpha", 1.0)), float(p.pop("s")), n)
        if kind == "sum":
            return Sum(tuple(children))
        if kind == "product":
            return Product(tuple(children))
        if kind == "scale":
            (child,) = children
            return Scale(float(p.pop("factor")), child)
        if kind == "shift":
            (child,) = children
            return Shift(p.pop("offset"), child)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FieldError):
            raise
        raise FieldError(f"bad parameters for {kind!r}: {exc}") from exc
    raise FieldError(f"unknown field kind {kind!r}")


def field_from_json(tree: dict) -> ScalarField:
    if not isinstance(tree, dict) or "kind" not in tree:
        raise FieldError("field description must be an object with a 'kind'")
    kids = [field_from_json(c) for c in tree.get("children", [])]
    return make_field(tree["kind"], tree.get("params", {}), kids)


# ---------------------------------------------------------------------------
# derivatives


def jet(u: ScalarField, x, v=None, m: int = 4) -> JetPoly:
    """Taylor coefficients of ``t -> u(x + t v)`` up to order ``m``.

    ``x`` may be a batch of points.  ``v`` defaults to the first unit vector.
    """
    if not 0 <= m <= MAX_JET_ORDER:
        raise ValueError(f"jet order must lie in [0, {MAX_JET_ORDER}]")
    X, shape = _coords(x, u.n)
    if v is None:
        v = (1.0,) + (0.0,) * (u.n - 1)
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape != (u.n,):
        raise ValueError(f"direction must have {u.n} components")
    jets = [JetPoly.variable(xi.reshape(-1), vi, m) for xi, vi in zip(X, v)]
    out = u.jet_of(jets)
    out.batch_shape = shape
    return out


def derivative(u: ScalarField, x, gamma) -> np.ndarray:
    """Partial derivative ``D^gamma u(x)``; ``gamma`` an int (1-d) or an index pair."""
    if isinstance(gamma, (int, np.integer)):
        gamma = (int(gamma),)
    gamma = tuple(int(g) for g in gamma)
    if len(gamma) != u.n or min(gamma) < 0:
        raise ValueError(f"multi-index must have {u.n} non-negative entries")
    order = sum(gamma)
    if order > MAX_JET_ORDER:
        raise ValueError(f"derivative order must be <= {MAX_JET_ORDER}")
    if u.n == 1:
        return jet(u, x, None, order).derivative(order)
    X, shape = _coords(x, 2)
    jets = [
        JetPoly.variable(X[0].reshape(-1), (1.0, 0.0), order, 2),
        JetPoly.variable(X[1].reshape(-1), (0.0, 1.0), order, 2),
    ]
    out = u.jet_of(jets)
    return out.derivative(gamma).reshape(shape)


def manufactured_pair(name: str, s: float, n: int = 1, **kw):
    """An exact pair ``(u, f)`` with ``integral delta u K_0 = f`` for the fractional kernel.

    ``"cos"``: ``u = cos(omega x + phase)``, ``f = -|omega|^{2s} u``.
    ``"gaussian"``: ``u = exp(-alpha|x|^2)`` with the closed-form ``f``.
    ``"constant"``: ``u = value``, ``f = 0``.
    """
    if name == "cos":
        u = Trig(kw.get("omega", 1.0), kw.get("phase", 0.0), n)
        w = math.sqrt(sum(o * o for o in u.omega))
        return u, Scale(-(w ** (2 * s)), u)
    if name == "gaussian":
        a = float(kw.get("alpha", 1.0))
        return Gaussian(a, n), FracGaussian(a, s, n)
    if name == "constant":
        val = float(kw.get("value", 1.0))
        zero = (0.0,) if n == 1 else ((0.0,),)
        return Polynomial((val,) if n == 1 else ((val,),), n), Polynomial(zero, n)
    raise FieldError(f"unknown manufactured pair {name!r}")
