import json

import pytest

from gevreykit import cli


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def _report(out):
    return json.loads((out / "report.json").read_text())


def test_stencil_command(tmp_path, capsys):
    assert cli.main(["stencil", "--k", "2", "--out", str(tmp_path)]) == 0
    rep = _report(tmp_path)
    assert [c["num"] for c in rep["result"]["coefficients"]] == ["1", "-2", "1"]
    assert rep["version"] and rep["job"]["k"] == 2
    assert (tmp_path / "tables" / "stencil.csv").read_text().startswith("node,coefficient,float\n")


def test_stencil_zero_and_too_large(tmp_path, capsys):
    assert cli.main(["stencil", "--k", "0", "--out", str(tmp_path)]) == 0
    rep = _report(tmp_path)
    assert rep["result"]["nodes"] == [0] and rep["result"]["coefficients"][0]["num"] == "1"
    assert cli.main(["stencil", "--k", "17"]) == 2
    assert "exceeds" in capsys.readouterr().err


def test_eval_symbol_job(tmp_path):
    fld = _write(tmp_path / "u.json", {"kind": "trig", "params": {"omega": [2.0]}})
    ker = _write(tmp_path / "k.json", {"family": "fractional", "n": 1, "s": 0.6})
    out = tmp_path / "o"
    assert cli.main(["eval", "--field", fld, "--kernel", ker, "--x", "0.25", "--out", str(out)]) == 0
    rep = _report(out)
    assert rep["result"]["exact"]["relative_error"] <= 1e-4


def test_eval_constant_is_zero(tmp_path):
    fld = _write(tmp_path / "u.json", {"kind": "polynomial", "params": {"coeffs": [3.0]}})
    out = tmp_path / "o"
    assert cli.main(["eval", "--field", fld, "--s", "0.75", "--out", str(out)]) == 0
    assert _report(out)["result"]["operator"]["value"] == 0.0


def test_eval_missing_kernel_parameter(tmp_path, capsys):
    fld = _write(tmp_path / "u.json", {"kind": "gaussian"})
    ker = _write(tmp_path / "k.json", {"family": "fractional", "n": 1})
    assert cli.main(["eval", "--field", fld, "--kernel", ker]) == 2
    assert cli.main(["eval", "--field", fld]) == 2


def test_unknown_suite_and_bad_flags(capsys):
    assert cli.main(["verify", "--suite", "nope"]) == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["stencil", "--k", "two"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 2


def test_verify_closure(tmp_path):
    assert cli.main(["verify", "--suite", "closure", "--out", str(tmp_path)]) == 0
    checks = {c["name"]: c for c in _report(tmp_path)["result"]["suites"][0]["checks"]}
    assert checks["trivial_gamma_le_2"]["passed"]
    assert checks["trivial_gamma_le_2"]["detail"]["Gamma"] <= 2


def test_ladder_and_fit(tmp_path):
    poly = _write(tmp_path / "p.json", {"kind": "polynomial", "params": {"coeffs": [0.0, 1.0, 2.0]}})
    bump = _write(tmp_path / "b.json", {"kind": "flat_bump"})
    cosf = _write(tmp_path / "c.json", {"kind": "trig"})
    assert cli.main(["ladder", "--field", cosf, "--R", "2", "--pmax", "6", "--out", str(tmp_path / "l")]) == 0
    assert _report(tmp_path / "l")["result"]["ladder"]["Nstar"]["3"] == pytest.approx(0.8414709848078965)
    assert cli.main(["fit", "--field", poly, "--out", str(tmp_path / "p")]) == 0
    assert _report(tmp_path / "p")["result"]["gevrey"]["marker"] == "finitely supported ladder"
    assert cli.main(["fit", "--field", cosf, "--out", str(tmp_path / "c")]) == 0
    assert 0.85 <= _report(tmp_path / "c")["result"]["gevrey"]["fit"]["sigma"] <= 1.15
    assert cli.main(["fit", "--field", bump, "--pmax", "18", "--out", str(tmp_path / "f")]) == 0
    assert 1.7 <= _report(tmp_path / "f")["result"]["gevrey"]["fit"]["sigma"] <= 2.3


def test_config_file_and_override(tmp_path):
    cfg = _write(tmp_path / "job.json", {"command": "stencil", "k": 3})
    assert cli.main(["stencil", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert _report(tmp_path / "a")["job"]["k"] == 3
    assert cli.main(["stencil", "--config", cfg, "--k", "4", "--out", str(tmp_path / "b")]) == 0
    assert _report(tmp_path / "b")["job"]["k"] == 4
    bad = _write(tmp_path / "bad.json", {"command": "stencil", "frobnicate": 1})
    assert cli.main(["stencil", "--config", bad]) == 2
    other = _write(tmp_path / "other.json", {"command": "verify"})
    assert cli.main(["stencil", "--config", other]) == 2


def test_report_is_canonical(tmp_path):
    cli.main(["stencil", "--k", "5", "--out", str(tmp_path / "a")])
    cli.main(["stencil", "--k", "5", "--out", str(tmp_path / "b")])
    a = (tmp_path / "a" / "report.json").read_bytes()
    assert a == (tmp_path / "b" / "report.json").read_bytes()
    assert a.decode() == cli.dumps(json.loads(a))


def test_non_finite_values_become_strings():
    assert json.loads(cli.dumps({"x": float("inf"), "y": float("nan")})) == {"x": "inf", "y": "nan"}
