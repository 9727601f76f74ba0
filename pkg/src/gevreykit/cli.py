"""Batch driver: ``gevreykit {stencil,eval,verify,ladder,fit}``.

Every run is described by a :class:`JobConfig`.  The report written to
``<out>/report.json`` embeds that config and the library version, uses sorted
keys and shortest round-trip floats, and contains no timestamps, so equal
configs give equal bytes.  Exit codes: 0 pass, 1 verification failure,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from . import fields as F
from . import gevrey as G
from . import kernel as Km
from . import quad as Q
from . import stencil as S
from . import verify as V
from ._kernels import USE_NUMBA

COMMANDS = ("stencil", "eval", "verify", "ladder", "fit")


class UsageError(Exception):
    pass


@dataclass
class JobConfig:
    command: str
    k: int | None = None
    s: float | None = None
    R: float = 2.0
    p_max: int = 14
    x: list | float = 0.0
    field: dict | None = None
    kernel: dict | None = None
    suite: str | None = None
    seed: int = 0
    grid: int = 513
    r_points: int = 64
    rho: float = 1e-2
    R_c: float = 1e3
    tol: float = 1e-10
    tail_mode: str = "auto"
    directions: int = 64
    out: str | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "JobConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        if "command" not in data:
            raise UsageError("config has no 'command'")
        return cls(**data)

    def identity(self) -> dict:
        """Everything that determines the result; the output location does not."""
        d = dataclasses.asdict(self)
        d.pop("out")
        return d


# ---------------------------------------------------------------------------
# canonical output


def canonical(obj):
    """Plain JSON types; non-finite floats become the strings ``inf``, ``-inf``, ``nan``."""
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [canonical(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps(obj) -> str:
    return json.dumps(canonical(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _cell(v):
    v = canonical(v)
    return repr(v) if isinstance(v, float) else str(v)


def table_csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(_cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def write_outputs(out: str | None, report: dict, tables: dict) -> None:
    if out is None:
        sys.stdout.write(dumps(report))
        return
    os.makedirs(os.path.join(out, "tables"), exist_ok=True)
    with open(os.path.join(out, "report.json"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(report))
    for name in sorted(tables):
        header, rows = tables[name]
        path = os.path.join(out, "tables", f"{name}.csv")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(table_csv(header, rows))


# ---------------------------------------------------------------------------
# helpers


def _need_field(cfg: JobConfig) -> F.ScalarField:
    if cfg.field is None:
        raise UsageError(f"{cfg.command} needs --field")
    return F.field_from_json(cfg.field)


def _kernel(cfg: JobConfig, n: int) -> Km.KernelSpec:
    if cfg.kernel is not None:
        return Km.kernel_from_json(cfg.kernel)
    if cfg.s is None:
        raise UsageError("no kernel given: pass --kernel FILE.json or --s")
    return Km.fractional_kernel(n, cfg.s)


def _exact_operator(u: F.ScalarField, K: Km.KernelSpec):
    """Closed-form image of ``u`` under the fractional operator, when one is known."""
    if K.kind != "fractional":
        return None
    if isinstance(u, F.Trig):
        w = math.sqrt(sum(o * o for o in u.omega))
        return lambda x: -(w ** (2 * K.s)) * float(u(x))
    if isinstance(u, F.Gaussian):
        g = F.FracGaussian(u.alpha, K.s, u.n)
        return lambda x: float(g(x))
    if isinstance(u, F.Polynomial) and u.degree == 0:
        return lambda x: 0.0
    if isinstance(u, F.Scale):
        inner = _exact_operator(u.base, K)
        return None if inner is None else (lambda x: u.factor * inner(x))
    if isinstance(u, F.Sum):
        parts = [_exact_operator(t, K) for t in u.terms]
        if any(p is None for p in parts):
            return None
        return lambda x: sum(p(x) for p in parts)
    return None


# relative accuracy demanded of eval when a closed form is available
EVAL_RTOL = 1e-4


# ---------------------------------------------------------------------------
# commands


def cmd_stencil(cfg: JobConfig):
    if cfg.k is None:
        raise UsageError("stencil needs --k")
    st = S.build_stencil(cfg.k)
    res = st.to_json()
    res["float_coefficients"] = st.float_coefficients.tolist()
    rows = [(j, str(c), float(c)) for j, c in zip(st.nodes, st.coefficients)]
    summary = [f"order {st.k}: " + "  ".join(f"{j}:{c}" for j, c in zip(st.nodes, st.coefficients))]
    return True, res, {"stencil": (("node", "coefficient", "float"), rows)}, summary


def cmd_eval(cfg: JobConfig):
    u = _need_field(cfg)
    K = _kernel(cfg, u.n)
    qc = Q.QuadratureConfig(rho=cfg.rho, R_c=cfg.R_c, tol=cfg.tol, tail_mode=cfg.tail_mode,
                            directions=cfg.directions)
    x = np.asarray(cfg.x, dtype=float)
    if u.n == 1:
        x = x.reshape(())
    val = Q.evaluate(u, K, x, qc)
    res = {"operator": val.to_json(), "kernel": K.to_json(), "field": u.to_json(),
           "quadrature": qc.to_json()}
    passed = True
    exact = _exact_operator(u, K)
    line = f"value {val.value!r} (error bound {val.error_bound:.3g})"
    if exact is not None:
        e = exact(x)
        err = abs(val.value - e)
        rel = err / abs(e) if e != 0 else (0.0 if err == 0 else math.inf)
        passed = err <= EVAL_RTOL * abs(e) if e != 0 else err <= val.error_bound
        res["exact"] = {"value": e, "abs_error": err, "relative_error": rel, "rtol": EVAL_RTOL}
        line += f"; exact {e!r}, relative error {rel:.3g}"
    zones = [(z, getattr(val, z), getattr(val, z + "_bound")) for z in ("inner", "middle", "tail")]
    return passed, res, {"zones": (("zone", "contribution", "bound"), zones)}, [line]


def cmd_verify(cfg: JobConfig):
    name = cfg.suite or "all"
    if name != "all" and name not in V.SUITES:
        raise UsageError(f"unknown suite {name!r}; choose from all, {', '.join(V.SUITES)}")
    results = V.run_suite(name, cfg.seed)
    tables = {}
    summary = []
    for r in results:
        tables.update(r.tables)
        for c in r.checks:
            summary.append(f"{'PASS' if c.passed else 'FAIL'}  {r.name}.{c.name}")
    passed = all(r.passed for r in results)
    return passed, {"suites": [r.to_json() for r in results]}, tables, summary


def _ladder_rows(lad: G.NormLadder):
    return [(p, lad.N(p), lad.M(p) if 0 <= p < len(lad.m) else "") for p in range(-2, lad.p_max + 1)]


def _compute_ladder(cfg: JobConfig, u):
    s = 0.75 if cfg.s is None else cfg.s
    return G.ladder(u, None, cfg.R, s, cfg.p_max, r_points=cfg.r_points, grid=cfg.grid)


def cmd_ladder(cfg: JobConfig):
    u = _need_field(cfg)
    lad = _compute_ladder(cfg, u)
    top = max(lad.nstar)
    summary = [f"N*({p}) = {v!r}" for p, v in zip(range(-2, lad.p_max + 1), lad.nstar)]
    return True, {"ladder": lad.to_json(), "field": u.to_json()}, \
        {"ladder": (("p", "Nstar", "M"), _ladder_rows(lad))}, summary + [f"max {top!r}"]


def _fit_field(cfg: JobConfig, u):
    lad = _compute_ladder(cfg, u)
    fit = G.fit_gevrey(lad)
    res = {"ladder": lad.to_json(), "fit": fit.to_json(), "field": u.to_json()}
    tables = {"ladder": (("p", "Nstar", "M"), _ladder_rows(lad))}
    if fit.finitely_supported:
        res["marker"] = "finitely supported ladder"
        return True, res, tables, ["finitely supported ladder: no Gevrey growth to fit"]
    key = G.check_key(lad, fit.V_safe, fit.Gamma, fit.sigma)
    res["key_check"] = dataclasses.asdict(key)
    line = (f"sigma {fit.sigma!r} (raw {fit.sigma_raw!r}), Gamma {fit.Gamma!r}, "
            f"V {fit.V_safe!r}; bound {'holds' if key.passed else 'fails'} on the ladder")
    return bool(key.passed), res, tables, [line]


def _fit_kernel(cfg: JobConfig, K):
    rep = Km.check_kernel(K, seed=cfg.seed)
    res = {"kernel": K.to_json(), "check": rep.to_json()}
    rows = [(k, h) for k, h in enumerate(rep.H)]
    summary = [
        f"{rep.K1}  K1  a0={rep.a0!r} eta={rep.eta!r}",
        f"{rep.K3}  K3  nu={rep.nu!r} Lambda={rep.Lambda!r} residual={rep.residual!r}",
    ]
    return rep.K1 == "PASS" and rep.K3 == "PASS", res, {"kernel_H": (("k", "H"), rows)}, summary


def cmd_fit(cfg: JobConfig):
    if cfg.field is None and cfg.kernel is None:
        raise UsageError("fit needs --field and/or --kernel")
    passed, res, tables, summary = True, {}, {}, []
    if cfg.field is not None:
        ok, r, t, s = _fit_field(cfg, F.field_from_json(cfg.field))
        passed &= ok
        res["gevrey"] = r
        tables.update(t)
        summary += s
    if cfg.kernel is not None:
        ok, r, t, s = _fit_kernel(cfg, Km.kernel_from_json(cfg.kernel))
        passed &= ok
        res["kernel"] = r
        tables.update(t)
        summary += s
    return passed, res, tables, summary


HANDLERS = {
    "stencil": cmd_stencil,
    "eval": cmd_eval,
    "verify": cmd_verify,
    "ladder": cmd_ladder,
    "fit": cmd_fit,
}


# ---------------------------------------------------------------------------
# argument handling


def _load_json(path: str, what: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {what} file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} file {path} is not valid JSON: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE.json", help="JobConfig JSON; flags override it")
    common.add_argument("--out", metavar="DIR", help="write report.json and tables/*.csv here")
    common.add_argument("--seed", type=int, metavar="N")
    common.add_argument("--s", type=float, help="fractional order in (1/2, 1)")
    common.add_argument("--R", type=float, help="outer radius of the ladder ball")
    common.add_argument("--pmax", type=int, help="highest ladder order")
    common.add_argument("--field", metavar="FILE.json", help="field descriptor")
    common.add_argument("--kernel", metavar="FILE.json", help="kernel descriptor")

    p = argparse.ArgumentParser(prog="gevreykit", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"gevreykit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("stencil", parents=[common], help="exact quotient weights of order k")
    sp.add_argument("--k", type=int)
    sp = sub.add_parser("eval", parents=[common], help="evaluate the nonlocal operator at a point")
    sp.add_argument("--x", type=float, nargs="+", help="evaluation point")
    sp = sub.add_parser("verify", parents=[common], help="run a verification suite")
    sp.add_argument("--suite", metavar="NAME", help="stencil, proint, apriori, step, closure or all")
    sub.add_parser("ladder", parents=[common], help="Gevrey norm ladder of a field")
    sub.add_parser("fit", parents=[common], help="Gevrey fit of a field and/or kernel growth fit")
    return p


def config_from_args(ns: argparse.Namespace) -> JobConfig:
    base = {"command": ns.command}
    if ns.config:
        data = _load_json(ns.config, "config")
        if not isinstance(data, dict):
            raise UsageError("config must be a JSON object")
        if data.get("command", ns.command) != ns.command:
            raise UsageError(f"config is for '{data['command']}', not '{ns.command}'")
        base.update(data)
        base["command"] = ns.command
    flags = {
        "k": getattr(ns, "k", None),
        "s": ns.s,
        "R": ns.R,
        "p_max": ns.pmax,
        "suite": getattr(ns, "suite", None),
        "seed": ns.seed,
        "out": ns.out,
    }
    x = getattr(ns, "x", None)
    if x is not None:
        flags["x"] = x[0] if len(x) == 1 else list(x)
    if ns.field:
        flags["field"] = _load_json(ns.field, "field")
    if ns.kernel:
        flags["kernel"] = _load_json(ns.kernel, "kernel")
    base.update({k: v for k, v in flags.items() if v is not None})
    return JobConfig.from_dict(base)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)  # exits 2 on malformed flags
    try:
        cfg = config_from_args(ns)
        passed, result, tables, summary = HANDLERS[cfg.command](cfg)
    except (UsageError, F.FieldError, Km.KernelError, S.OrderTooLargeError, ValueError,
            TypeError) as exc:
        print(f"gevreykit: error: {exc}", file=sys.stderr)
        return 2
    report = {
        "version": __version__,
        "job": cfg.identity(),
        "backend": "numba" if USE_NUMBA else "numpy",
        "passed": bool(passed),
        "result": result,
    }
    write_outputs(cfg.out, report, tables)
    stream = sys.stdout if cfg.out is not None else sys.stderr
    for line in summary:
        print(line, file=stream)
    print("PASS" if passed else "FAIL", file=stream)
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
