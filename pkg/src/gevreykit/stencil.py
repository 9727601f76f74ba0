"""Incremental quotients on integer node sets.

A quotient of order ``k`` samples ``k + 1`` consecutive integer nodes centred
on the origin and weights them so that every polynomial of degree below ``k``
is annihilated while ``t**k`` maps to ``k!``.  The weights are computed once,
exactly, over the rationals; they are rounded to floats only when a quotient
is applied to a floating-point field.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

__all__ = [
    "MAX_ORDER",
    "OrderTooLargeError",
    "WindowMismatchError",
    "Stencil",
    "MultiStencil",
    "stencil_nodes",
    "build_stencil",
    "apply",
    "apply_exact",
    "apply_multi",
    "derivative_estimate",
    "leibniz_split",
    "summation_by_parts_residual",
]

MAX_ORDER = 16


class OrderTooLargeError(ValueError):
    pass


class WindowMismatchError(ValueError):
    pass


def stencil_nodes(k: int) -> list[int]:
    """Integers in the half-open interval ``(-(k+1)/2, (k+1)/2]``."""
    if k < 0:
        raise ValueError("order must be non-negative")
    # smallest integer strictly above -(k+1)/2
    lo = -((k + 1) // 2) + (1 if (k + 1) % 2 == 0 else 0)
    return list(range(lo, lo + k + 1))


def _bareiss_solve(A: list[list[int]], b: list[int]) -> list[Fraction]:
    """Solve an integer system exactly by fraction-free elimination."""
    n = len(A)
    M = [list(row) + [rhs] for row, rhs in zip(A, b)]
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next(i for i in range(k + 1, n) if M[i][k] != 0)
            M[k], M[swap] = M[swap], M[k]
        for i in range(k + 1, n):
            for j in range(k + 1, n + 1):
                # exact division is guaranteed by Sylvester's identity
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
            M[i][k] = 0
        prev = M[k][k]
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        acc = Fraction(M[i][n])
        for j in range(i + 1, n):
            acc -= M[i][j] * x[j]
        x[i] = acc / M[i][i]
    return x


@dataclass(frozen=True)
class Stencil:
    k: int
    nodes: tuple
    coefficients: tuple  # Fractions

    @property
    def float_coefficients(self) -> np.ndarray:
        return np.array([float(c) for c in self.coefficients])

    def moments(self) -> list[Fraction]:
        """``sum_i c_i j_i^m`` for ``m = 0..k`` (exact)."""
        return [
            sum((c * Fraction(j) ** m for c, j in zip(self.coefficients, self.nodes)), Fraction(0))
            for m in range(self.k + 1)
        ]

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "nodes": list(self.nodes),
            "coefficients": [
                {"num": str(c.numerator), "den": str(c.denominator)} for c in self.coefficients
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Stencil":
        coeffs = tuple(Fraction(int(c["num"]), int(c["den"])) for c in data["coefficients"])
        return cls(int(data["k"]), tuple(int(j) for j in data["nodes"]), coeffs)


@functools.lru_cache(maxsize=None)
def _cached(k: int) -> Stencil:
    nodes = stencil_nodes(k)
    V = [[j**m for j in nodes] for m in range(k + 1)]
    rhs = [0] * k + [math.factorial(k)]
    return Stencil(k, tuple(nodes), tuple(_bareiss_solve(V, rhs)))


def build_stencil(k: int, max_order: int = MAX_ORDER) -> Stencil:
    if k < 0:
        raise ValueError("order must be non-negative")
    if k > max_order:
        raise OrderTooLargeError(
            f"order {k} exceeds the maximum {max_order}; use jets for high derivatives"
        )
    return _cached(int(k))


def _direction(v, n):
    if v is None:
        v = (1.0,) + (0.0,) * (n - 1)
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.shape != (n,):
        raise ValueError(f"direction must have {n} components")
    return arr


def _sample_points(x, offsets, n):
    """Points ``x + offset`` for each offset row; adds a trailing sample axis."""
    x = np.asarray(x, dtype=float)
    if n == 1:
        return x[..., None] + offsets[:, 0]
    return x[..., None, :] + offsets


def _ordered_dot(vals, w):
    """Weighted sum over the last axis in node order.

    A BLAS product may reorder the sum depending on the batch shape; a fixed
    order makes scalar and batched calls bit-identical.
    """
    out = vals[..., 0] * w[0]
    for i in range(1, w.size):
        out = out + vals[..., i] * w[i]
    return np.asarray(out)


def _field_dim(u) -> int:
    return int(getattr(u, "n", 1))


def apply(st: Stencil, u, x, h: float, v=None, dps: int | None = None):
    """``sum_i c_i u(x + j_i h v)`` for a field or vectorised callable ``u``.

    ``x`` may be a batch of points; the result has the batch shape.  With
    ``dps`` the sum is formed in that many decimal digits at a single point
    (``u`` must offer ``eval_mp``) and rounded to a float at the end, which
    removes the ``h^{-k}`` roundoff floor.
    """
    if not h > 0:
        raise ValueError("step must be positive")
    n = _field_dim(u)
    v = _direction(v, n)
    if dps is not None:
        return _apply_mp(st, u, x, h, v, dps)
    offsets = np.asarray(st.nodes, dtype=float)[:, None] * h * v[None, :]
    vals = np.asarray(u(_sample_points(x, offsets, n)), dtype=float)
    out = _ordered_dot(vals, st.float_coefficients)
    return float(out) if out.ndim == 0 else out


def _apply_mp(st, u, x, h, v, dps):
    import mpmath

    with mpmath.workdps(dps):
        xs = [mpmath.mpf(a) for a in np.atleast_1d(np.asarray(x, dtype=float))]
        hh = mpmath.mpf(h)
        acc = mpmath.mpf(0)
        for c, j in zip(st.coefficients, st.nodes):
            pt = [xi + j * hh * vi for xi, vi in zip(xs, v)]
            val = u.eval_mp(pt[0] if len(pt) == 1 else pt, dps)
            acc += mpmath.mpf(c.numerator) / c.denominator * val
        return float(acc)


def apply_exact(st: Stencil, func: Callable, x, h) -> Fraction:
    """Exact 1-d quotient of a callable on rationals (``func`` must accept Fractions)."""
    x, h = Fraction(x), Fraction(h)
    return sum((c * func(x + j * h) for c, j in zip(st.coefficients, st.nodes)), Fraction(0))


@dataclass(frozen=True)
class MultiStencil:
    """An ordered list of ``(direction, order)`` factors.

    Quotients along different factors commute, so evaluation canonically sorts
    the factors; any permutation gives bit-identical results.
    """

    factors: tuple

    def __post_init__(self):
        norm = []
        for d, k in self.factors:
            if int(k) < 1:
                raise ValueError("factor orders must be positive")
            norm.append((tuple(float(a) for a in np.atleast_1d(d)), int(k)))
        object.__setattr__(self, "factors", tuple(norm))

    @property
    def order(self) -> int:
        return sum(k for _, k in self.factors)

    def flattened(self) -> tuple[np.ndarray, np.ndarray]:
        """Unit offsets (in units of ``h``) and float weights of the product stencil."""
        facs = sorted(self.factors)
        sts = [build_stencil(k) for _, k in facs]
        dirs = [np.asarray(d) for d, _ in facs]
        offs, wts = [], []
        for combo in itertools.product(*[range(len(st.nodes)) for st in sts]):
            w = Fraction(1)
            off = np.zeros_like(dirs[0])
            for st, d, i in zip(sts, dirs, combo):
                w *= st.coefficients[i]
                off = off + st.nodes[i] * d
            offs.append(off)
            wts.append(float(w))
        return np.array(offs), np.array(wts)


def apply_multi(ms: MultiStencil, u, x, h: float):
    """Composite quotient as one flattened sum over index tuples."""
    if not h > 0:
        raise ValueError("step must be positive")
    n = _field_dim(u)
    offs, wts = ms.flattened()
    if offs.shape[1] != n:
        raise ValueError(f"factor directions must have {n} components")
    vals = np.asarray(u(_sample_points(x, offs * h, n)), dtype=float)
    out = _ordered_dot(vals, wts)
    return float(out) if out.ndim == 0 else out


def derivative_estimate(u, x, k: int, v=None, h: float = 1e-3, dps: int | None = None):
    """Quotient divided by ``h**k``; error is O(h) for fields smooth past order ``k``.

    In double precision the error stops decaying once roundoff, of order
    ``eps sum|c_i| |u| / h^k``, dominates; ``dps`` moves that floor away.
    """
    if dps is None:
        return apply(build_stencil(k), u, x, h, v) / h**k
    import mpmath

    with mpmath.workdps(dps):
        q = mpmath.mpf(apply(build_stencil(k), u, x, h, v, dps=dps + 10))
    # the quotient is rounded once; dividing by a power of two is exact
    return float(q) / h**k


def leibniz_split(f, g, x, h: float, v=None):
    """Both sides of ``T(fg)(x) = f(x + hv) Tg(x) + Tf(x) g(x)`` for first-order ``T``."""
    st = build_stencil(1)
    n = _field_dim(f)
    vv = _direction(v, n)

    def fg(p):
        return f(p) * g(p)

    fg.n = n
    lhs = apply(st, fg, x, h, vv)
    shifted = np.asarray(x, dtype=float) + h * (vv[0] if n == 1 else vv)
    rhs = f(shifted) * apply(st, g, x, h, vv) + apply(st, f, x, h, vv) * g(np.asarray(x, float))
    return lhs, (float(rhs) if np.ndim(rhs) == 0 else rhs)


def summation_by_parts_residual(f, g, h: float) -> float:
    """``|sum T_h f . g - sum f . T_{-h} g|`` over a lattice, weighted by ``h``.

    ``f`` holds samples at lattice nodes ``0..N-1`` and vanishes elsewhere;
    ``g`` holds samples at nodes ``-1..N-1`` (so ``len(g) == len(f) + 1``).
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.ndim != 1 or g.ndim != 1 or g.size != f.size + 1:
        raise WindowMismatchError("g must cover the window of f widened by one node on the left")
    # forward quotient of f on nodes -1..N-1 (zero padding outside the window)
    fp = np.concatenate(([0.0], f, [0.0]))
    tf = fp[1:] - fp[:-1]
    lhs = h * float(np.dot(tf, g))
    tg = g[:-1] - g[1:]  # g(x - h) - g(x) at nodes 0..N-1
    rhs = h * float(np.dot(f, tg))
    return abs(lhs - rhs)
