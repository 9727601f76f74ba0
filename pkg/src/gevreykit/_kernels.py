"""Hot inner loops: truncated power-series recurrences and the ladder sweep.

Every kernel exists twice with identical signatures:

* ``numpy_impl`` loops over the (small) coefficient index set and vectorises
  over the batch axis with numpy;
* ``numba_impl`` is the same algorithm with an explicit batch loop, compiled
  with ``numba.njit``.

Module-level names (``mul``, ``exp``, ...) dispatch to numba unless the
environment variable ``GEVREYKIT_NO_NUMBA`` is set to a non-empty value other
than ``0``, or numba cannot be imported.

Coefficient arrays have shape ``(ncoef, N)``.  Monomials are ordered by total
degree, so index 0 is the constant term.  ``I, J, K`` list every product
``mono[I] * mono[J] = mono[K]`` of total degree <= order, sorted by ``K``;
``ptr`` holds the CSR offsets of each ``K`` and ``deg`` the total degree of
each monomial.
"""

from __future__ import annotations

import math
import os
from types import SimpleNamespace

import numpy as np

__all__ = [
    "USE_NUMBA",
    "numpy_impl",
    "numba_impl",
    "mul",
    "div",
    "exp",
    "log",
    "power",
    "sincos",
    "cummax_sweep",
]


def _flag_disabled() -> bool:
    val = os.environ.get("GEVREYKIT_NO_NUMBA", "")
    return val not in ("", "0")


# ---------------------------------------------------------------------------
# numpy path


def _np_mul(a, b, I, J, K, ptr, deg):
    out = np.zeros((ptr.size - 1, a.shape[1]))
    for t in range(I.size):
        out[K[t]] += a[I[t]] * b[J[t]]
    return out


def _np_div(a, b, I, J, K, ptr, deg):
    nc = ptr.size - 1
    q = np.zeros((nc, a.shape[1]))
    q[0] = a[0] / b[0]
    for k in range(1, nc):
        acc = a[k].copy()
        for t in range(ptr[k], ptr[k + 1]):
            i = I[t]
            if i != 0:
                acc -= b[i] * q[J[t]]
        q[k] = acc / b[0]
    return q


def _np_exp(f, I, J, K, ptr, deg):
    nc = ptr.size - 1
    e = np.zeros((nc, f.shape[1]))
    e[0] = np.exp(f[0])
    for k in range(1, nc):
        acc = np.zeros(f.shape[1])
        for t in range(ptr[k], ptr[k + 1]):
            i = I[t]
            if i != 0:
                acc += deg[i] * f[i] * e[J[t]]
        e[k] = acc / deg[k]
    return e


def _np_log(f, I, J, K, ptr, deg):
    nc = ptr.size - 1
    g = np.zeros((nc, f.shape[1]))
    g[0] = np.log(f[0])
    for k in range(1, nc):
        acc = deg[k] * f[k]
        for t in range(ptr[k], ptr[k + 1]):
            i = I[t]
            j = J[t]
            if i != 0 and j != 0:
                acc = acc - deg[j] * f[i] * g[j]
        g[k] = acc / (deg[k] * f[0])
    return g


def _np_power(f, a, I, J, K, ptr, deg):
    nc = ptr.size - 1
    g = np.zeros((nc, f.shape[1]))
    g[0] = f[0] ** a
    for k in range(1, nc):
        acc = np.zeros(f.shape[1])
        for t in range(ptr[k], ptr[k + 1]):
            i = I[t]
            if i != 0:
                j = J[t]
                acc += (a * deg[i] - deg[j]) * f[i] * g[j]
        g[k] = acc / (deg[k] * f[0])
    return g


def _np_sincos(f, I, J, K, ptr, deg):
    nc = ptr.size - 1
    s = np.zeros((nc, f.shape[1]))
    c = np.zeros((nc, f.shape[1]))
    s[0] = np.sin(f[0])
    c[0] = np.cos(f[0])
    for k in range(1, nc):
        accs = np.zeros(f.shape[1])
        accc = np.zeros(f.shape[1])
        for t in range(ptr[k], ptr[k + 1]):
            i = I[t]
            if i != 0:
                j = J[t]
                w = deg[i] * f[i]
                accs += w * c[j]
                accc -= w * s[j]
        s[k] = accs / deg[k]
        c[k] = accc / deg[k]
    return s, c


def _np_cummax_sweep(absx, vals, radii):
    """For each radius r: max of vals over points with absx <= r (-inf if none)."""
    order = np.argsort(absx, kind="stable")
    xs = absx[order]
    run = np.maximum.accumulate(vals[:, order], axis=1)
    idx = np.searchsorted(xs, radii, side="right") - 1
    out = np.full((vals.shape[0], radii.size), -np.inf)
    ok = idx >= 0
    out[:, ok] = run[:, idx[ok]]
    return out


numpy_impl = SimpleNamespace(
    mul=_np_mul,
    div=_np_div,
    exp=_np_exp,
    log=_np_log,
    power=_np_power,
    sincos=_np_sincos,
    cummax_sweep=_np_cummax_sweep,
)


# ---------------------------------------------------------------------------
# numba path


def _nb_mul(a, b, I, J, K, ptr, deg):
    n = a.shape[1]
    out = np.zeros((ptr.size - 1, n))
    for t in range(I.size):
        i = I[t]
        j = J[t]
        k = K[t]
        for m in range(n):
            out[k, m] += a[i, m] * b[j, m]
    return out


# The recurrences keep the batch loop innermost (contiguous rows) and add
# terms in the same order as the numpy path.


def _nb_div(a, b, I, J, K, ptr, deg):
    nc = ptr.size - 1
    n = a.shape[1]
    q = np.zeros((nc, n))
    for m in range(n):
        q[0, m] = a[0, m] / b[0, m]
    for k in range(1, nc):
        for m in range(n):
            q[k, m] = a[k, m]
        for t in range(ptr[k], ptr[k + 1]):
            i = I[t]
            if i != 0:
                j = J[t]
                for m in range(n):
                    q[k, m] -= b[i, m] * q[j, m]
        for m in range(n):
            q[k, m] /= b[0, m]
    return q


def _nb_exp(f, I, J, K, ptr, deg):
    nc = ptr.size - 1
    n = f.shape[1]
    e = np.zeros((nc, n))
    for m in range(n):
        e[0, m] = math.exp(f[0, m])
    for k in range(1, nc):
        for t in range(ptr[k], ptr[k + 1]):
            i = I[t]
            if i != 0:
                j = J[t]
                d = deg[i]
                for m in range(n):
                    e[k, m] += d * f[i, m] * e[j, m]
        for m in range(n):
            e[k, m] /= deg[k]
    return e


def _nb_log(f, I, J, K, ptr, deg):
    nc = ptr.size - 1
    n = f.shape[1]
    g = np.zeros((nc, n))
    for m in range(n):
        g[0, m] = math.log(f[0, m])
    for k in range(1, nc):
        for m in range(n):
            g[k, m] = deg[k] * f[k, m]
        for t in range(ptr[k], ptr[k + 1]):
            i = I[t]
            j = J[t]
            if i != 0 and j != 0:
                d = deg[j]
                for m in range(n):
                    g[k, m] -= d * f[i, m] * g[j, m]
        for m in range(n):
            g[k, m] /= deg[k] * f[0, m]
    return g


def _nb_power(f, a, I, J, K, ptr, deg):
    nc = ptr.size - 1
    n = f.shape[1]
    g = np.zeros((nc, n))
    for m in range(n):
        g[0, m] = f[0, m] ** a
    for k in range(1, nc):
        for t in range(ptr[k], ptr[k + 1]):
            i = I[t]
            if i != 0:
                j = J[t]
                w = a * deg[i] - deg[j]
                for m in range(n):
                    g[k, m] += w * f[i, m] * g[j, m]
        for m in range(n):
            g[k, m] /= deg[k] * f[0, m]
    return g


def _nb_sincos(f, I, J, K, ptr, deg):
    nc = ptr.size - 1
    n = f.shape[1]
    s = np.zeros((nc, n))
    c = np.zeros((nc, n))
    for m in range(n):
        s[0, m] = math.sin(f[0, m])
        c[0, m] = math.cos(f[0, m])
    for k in range(1, nc):
        for t in range(ptr[k], ptr[k + 1]):
            i = I[t]
            if i != 0:
                j = J[t]
                d = deg[i]
                for m in range(n):
                    w = d * f[i, m]
                    s[k, m] += w * c[j, m]
                    c[k, m] -= w * s[j, m]
        for m in range(n):
            s[k, m] /= deg[k]
            c[k, m] /= deg[k]
    return s, c


def _nb_cummax_sweep(absx, vals, radii):
    order = np.argsort(absx, kind="mergesort")
    nrow = vals.shape[0]
    nr = radii.size
    out = np.full((nrow, nr), -np.inf)
    ridx = np.argsort(radii, kind="mergesort")
    for row in range(nrow):
        best = -np.inf
        p = 0
        for q in range(nr):
            r = radii[ridx[q]]
            while p < order.size and absx[order[p]] <= r:
                v = vals[row, order[p]]
                if v > best:
                    best = v
                p += 1
            out[row, ridx[q]] = best
    return out


_NB_SOURCES = dict(
    mul=_nb_mul,
    div=_nb_div,
    exp=_nb_exp,
    log=_nb_log,
    power=_nb_power,
    sincos=_nb_sincos,
    cummax_sweep=_nb_cummax_sweep,
)

try:
    import numba

    numba_impl = SimpleNamespace(
        **{name: numba.njit(cache=True)(fn) for name, fn in _NB_SOURCES.items()}
    )
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_impl = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _flag_disabled()

_active = numba_impl if USE_NUMBA else numpy_impl

mul = _active.mul
div = _active.div
exp = _active.exp
log = _active.log
power = _active.power
sincos = _active.sincos
cummax_sweep = _active.cummax_sweep
