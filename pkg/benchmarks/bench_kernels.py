"""Time the numba and numpy implementations of the jet and sweep kernels.

Usage: python3 benchmarks/bench_kernels.py [--batch N] [--repeat R]

Both paths are imported directly, so the GEVREYKIT_NO_NUMBA flag is irrelevant
here.  Each numba kernel is called once before timing so compilation is not
counted.  Results are checked to agree before any timing is reported.
"""

import argparse
import timeit

import numpy as np

from gevreykit import _kernels as kn
from gevreykit.jets import basis


def cases(batch, rng):
    b1 = basis(1, 24)
    b2 = basis(2, 12)
    out = []
    for tag, b in (("1var/24", b1), ("2var/12", b2)):
        t = (b.I, b.J, b.K, b.ptr, b.deg)
        nc = b.ptr.size - 1
        a = rng.normal(size=(nc, batch)) * 0.3
        c = rng.normal(size=(nc, batch)) * 0.3
        a[0] = 1.5 + rng.random(batch)
        c[0] = 1.0 + rng.random(batch)
        out += [
            (f"mul {tag}", "mul", (a, c) + t),
            (f"div {tag}", "div", (a, c) + t),
            (f"exp {tag}", "exp", (a,) + t),
            (f"log {tag}", "log", (a,) + t),
            (f"power {tag}", "power", (a, 0.75) + t),
            (f"sincos {tag}", "sincos", (a,) + t),
        ]
    absx = np.abs(rng.normal(size=4 * batch))
    vals = rng.normal(size=(20, 4 * batch))
    radii = np.linspace(0.0, 3.0, 64)
    out.append(("cummax_sweep", "cummax_sweep", (absx, vals, radii)))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=2048)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if kn.numba_impl is None:
        raise SystemExit("numba is not importable; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<18}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for label, name, arg in cases(args.batch, rng):
        fnp = getattr(kn.numpy_impl, name)
        fnb = getattr(kn.numba_impl, name)
        ref = np.asarray(fnp(*arg))
        got = np.asarray(fnb(*arg))  # also compiles
        if not np.allclose(ref, got, rtol=1e-12, atol=1e-12, equal_nan=True):
            raise SystemExit(f"{label}: paths disagree")
        tnp = min(timeit.repeat(lambda: fnp(*arg), number=1, repeat=args.repeat))
        tnb = min(timeit.repeat(lambda: fnb(*arg), number=1, repeat=args.repeat))
        print(f"{label:<18}{1e3 * tnp:>12.3f}{1e3 * tnb:>12.3f}{tnp / tnb:>10.1f}")


if __name__ == "__main__":
    main()
