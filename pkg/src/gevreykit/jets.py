"""Truncated Taylor polynomials ("jets") in one or two formal variables.

A :class:`JetPoly` carries the Taylor coefficients of a function of the formal
variable(s) ``t`` (or ``(t1, t2)``) up to total degree ``order``, for a batch
of base points at once.  All arithmetic is exact truncation of formal power
series arithmetic; the transcendental primitives use the classical
Euler-operator recurrences, which work unchanged in several variables because
they only ever multiply homogeneous parts.

The univariate case is what the fields module uses for directional
derivatives; the bivariate case gives mixed partials in two dimensions.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels

__all__ = ["JetBasis", "JetPoly", "basis"]

MAX_ORDER = 32


@dataclass(frozen=True, eq=False)
class JetBasis:
    """Monomial bookkeeping for ``nvars`` variables up to total degree ``order``."""

    nvars: int
    order: int
    exponents: tuple  # exponent tuple of each monomial, degree-ordered
    index: dict
    deg: np.ndarray
    I: np.ndarray
    J: np.ndarray
    K: np.ndarray
    ptr: np.ndarray

    @property
    def size(self) -> int:
        return len(self.exponents)

    def factorials(self) -> np.ndarray:
        """Multi-index factorial of each monomial (``theta!``)."""
        return np.array(
            [math.prod(math.factorial(e) for e in ex) for ex in self.exponents],
            dtype=float,
        )


@functools.lru_cache(maxsize=None)
def basis(nvars: int, order: int) -> JetBasis:
    if nvars not in (1, 2):
        raise ValueError(f"jets support 1 or 2 variables, got {nvars}")
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"jet order must lie in [0, {MAX_ORDER}], got {order}")
    if nvars == 1:
        exps = [(d,) for d in range(order + 1)]
    else:
        exps = [(d - b, b) for d in range(order + 1) for b in range(d + 1)]
    index = {e: i for i, e in enumerate(exps)}
    deg = np.array([sum(e) for e in exps], dtype=np.int64)
    trip = []
    for i, ei in enumerate(exps):
        for j, ej in enumerate(exps):
            ek = tuple(a + b for a, b in zip(ei, ej))
            if sum(ek) <= order:
                trip.append((index[ek], i, j))
    trip.sort()
    K = np.array([t[0] for t in trip], dtype=np.int64)
    I = np.array([t[1] for t in trip], dtype=np.int64)
    J = np.array([t[2] for t in trip], dtype=np.int64)
    ptr = np.searchsorted(K, np.arange(len(exps) + 1)).astype(np.int64)
    return JetBasis(nvars, order, tuple(exps), index, deg.astype(float), I, J, K, ptr)


def _tables(b: JetBasis):
    return b.I, b.J, b.K, b.ptr, b.deg


class JetPoly:
    """Batch of truncated Taylor polynomials.

    ``coeffs`` has shape ``(ncoef,) + batch_shape``.  In one variable
    ``coeffs[k]`` is the coefficient of ``t**k``; in two variables use
    :meth:`coef` with an exponent pair.
    """

    __slots__ = ("c", "basis", "batch_shape")

    def __init__(self, c: np.ndarray, b: JetBasis, batch_shape: tuple):
        self.c = c  # (ncoef, N), C-contiguous float64
        self.basis = b
        self.batch_shape = batch_shape

    # -- construction -----------------------------------------------------

    @classmethod
    def constant(cls, value, order: int, nvars: int = 1) -> "JetPoly":
        b = basis(nvars, order)
        v = np.asarray(value, dtype=float)
        c = np.zeros((b.size, v.size))
        c[0] = v.ravel()
        return cls(c, b, v.shape)

    @classmethod
    def variable(cls, base, slope, order: int, nvars: int = 1) -> "JetPoly":
        """``base + sum_i slope[i] * t_i`` (``slope`` a scalar in one variable)."""
        b = basis(nvars, order)
        v = np.asarray(base, dtype=float)
        c = np.zeros((b.size, v.size))
        c[0] = v.ravel()
        if order >= 1:
            slopes = np.atleast_1d(np.asarray(slope, dtype=float))
            for i in range(nvars):
                e = tuple(1 if q == i else 0 for q in range(nvars))
                c[b.index[e]] = slopes[i]
        return cls(c, b, v.shape)

    @classmethod
    def from_coeffs(cls, coeffs, nvars: int = 1) -> "JetPoly":
        arr = np.asarray(coeffs, dtype=float)
        ncoef = arr.shape[0]
        if nvars == 1:
            order = ncoef - 1
        else:
            order = int(round((math.sqrt(8 * ncoef + 1) - 3) / 2))
        b = basis(nvars, order)
        if b.size != ncoef:
            raise ValueError("coefficient count does not match a full jet basis")
        batch = arr.shape[1:]
        return cls(np.ascontiguousarray(arr.reshape(ncoef, -1)), b, batch)

    # -- accessors --------------------------------------------------------

    @property
    def order(self) -> int:
        return self.basis.order

    @property
    def nvars(self) -> int:
        return self.basis.nvars

    @property
    def coeffs(self) -> np.ndarray:
        return self.c.reshape((self.basis.size,) + self.batch_shape)

    @property
    def value(self) -> np.ndarray:
        return self.c[0].reshape(self.batch_shape)

    def coef(self, exponent) -> np.ndarray:
        if isinstance(exponent, (int, np.integer)):
            exponent = (int(exponent),)
        return self.c[self.basis.index[tuple(exponent)]].reshape(self.batch_shape)

    def derivative(self, exponent) -> np.ndarray:
        """Partial derivative ``D^theta`` at the base point (coefficient times theta!)."""
        if isinstance(exponent, (int, np.integer)):
            exponent = (int(exponent),)
        fac = math.prod(math.factorial(e) for e in exponent)
        return self.coef(exponent) * fac

    def derivatives(self) -> np.ndarray:
        """All derivatives, shape ``(ncoef,) + batch_shape``."""
        d = self.c * self.basis.factorials()[:, None]
        return d.reshape((self.basis.size,) + self.batch_shape)

    def __repr__(self) -> str:
        return f"JetPoly(nvars={self.nvars}, order={self.order}, batch={self.batch_shape})"

    # -- arithmetic -------------------------------------------------------

    def _new(self, c: np.ndarray) -> "JetPoly":
        return JetPoly(np.ascontiguousarray(c), self.basis, self.batch_shape)

    def _pair(self, other):
        """Return ``(a, b)`` jets with a common basis and batch."""
        if not isinstance(other, JetPoly):
            v = np.broadcast_to(np.asarray(other, dtype=float), self.batch_shape)
            c = np.zeros_like(self.c)
            c[0] = v.ravel()
            return self, self._new(c)
        if other.basis is not self.basis:
            raise ValueError("jets of different order or arity cannot be combined")
        na, nb = self.c.shape[1], other.c.shape[1]
        if na == nb:
            return self, other
        if nb == 1:
            return self, self._new(np.repeat(other.c, na, axis=1))
        if na == 1:
            return JetPoly(np.repeat(self.c, nb, axis=1), self.basis, other.batch_shape), other
        raise ValueError("jet batch shapes differ")

    def _binary(self, other, fn):
        a, b = self._pair(other)
        return fn(a, b)

    def __add__(self, other):
        if not isinstance(other, JetPoly):
            c = self.c.copy()
            c[0] = c[0] + np.broadcast_to(np.asarray(other, dtype=float), self.batch_shape).ravel()
            return self._new(c)
        return self._binary(other, lambda a, b: a._new(a.c + b.c))

    __radd__ = __add__

    def __neg__(self):
        return self._new(-self.c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, JetPoly):
            v = np.broadcast_to(np.asarray(other, dtype=float), self.batch_shape).ravel()
            return self._new(self.c * v[None, :])
        return self._binary(
            other, lambda a, b: a._new(_kernels.mul(a.c, b.c, *_tables(a.basis)))
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, JetPoly):
            v = np.broadcast_to(np.asarray(other, dtype=float), self.batch_shape).ravel()
            return self._new(self.c / v[None, :])
        return self._binary(
            other, lambda a, b: a._new(_kernels.div(a.c, b.c, *_tables(a.basis)))
        )

    def __rtruediv__(self, other):
        b, a = self._pair(other)
        return a / b

    def __pow__(self, a):
        a = float(a)
        if a == int(a) and 0 <= a <= 4:
            out = JetPoly.constant(np.ones(self.batch_shape), self.order, self.nvars)
            for _ in range(int(a)):
                out = out * self
            return out
        return self._new(_kernels.power(self.c, a, *_tables(self.basis)))

    # -- primitives -------------------------------------------------------

    def exp(self) -> "JetPoly":
        return self._new(_kernels.exp(self.c, *_tables(self.basis)))

    def log(self) -> "JetPoly":
        return self._new(_kernels.log(self.c, *_tables(self.basis)))

    def sin(self) -> "JetPoly":
        s, _ = _kernels.sincos(self.c, *_tables(self.basis))
        return self._new(s)

    def cos(self) -> "JetPoly":
        _, c = _kernels.sincos(self.c, *_tables(self.basis))
        return self._new(c)

    def sqrt(self) -> "JetPoly":
        return self ** 0.5

    def compose(self, series) -> "JetPoly":
        """Evaluate ``g(self)`` given the Taylor coefficients of ``g`` at ``self.value``.

        ``series`` has shape ``(order + 1,) + batch_shape`` with
        ``series[k] = g^{(k)}(value) / k!``.
        """
        g = np.asarray(series, dtype=float).reshape(self.order + 1, -1)
        delta = self._new(self.c.copy())
        delta.c[0] = 0.0
        acc = JetPoly(np.zeros_like(self.c), self.basis, self.batch_shape)
        acc.c[0] = g[self.order]
        for q in range(self.order - 1, -1, -1):
            acc = acc * delta
            acc.c[0] += g[q]
        return acc


def dot(xs, ys):
    """Sum of products of two equal-length sequences of jets."""
    acc = xs[0] * ys[0]
    for a, b in zip(xs[1:], ys[1:]):
        acc = acc + a * b
    return acc
