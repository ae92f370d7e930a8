import json
import subprocess
import sys

import pytest

from paracontact import cli, models, suites
from paracontact.errors import OrderExhausted
from paracontact.report import ResidualReport
from paracontact.suites import ConfigError, RunConfig, run_suite


def run(args, capsys):
    code = cli.main(args)
    return code, capsys.readouterr()


@pytest.mark.parametrize(
    "args",
    [
        ["flat-group", "--n", "2"],
        ["compat", "--points", "3"],
        ["hyperboloid", "--points", "3"],
        ["prop31", "--points", "2"],
        ["conformal-invariance", "--n", "2", "--u", "0.3*u1*v1", "--points", "3"],
        ["flatness-criterion", "--points", "3"],
        ["integrability", "--points", "2"],
        ["cayley", "--points", "3"],
        ["yamabe", "--n", "3", "--eps", "0.5", "--tol", "1e-9"],
        ["kelvin", "--points", "3"],
        ["cr", "--points", "3"],
    ],
)
def test_suites_pass(args, capsys):
    code, out = run(args, capsys)
    assert code == 0, out.out
    assert "passed" in out.out


def test_flat_group_residuals_tiny(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, _ = run(["flat-group", "--n", "2", "--out", str(path)], capsys)
    data = json.loads(path.read_text())
    assert code == 0
    assert data["suite"] == "flat-group"
    assert data["summary"]["max_residual"] < 1e-10
    assert data["summary"]["total"] == data["summary"]["passed"] == len(data["cases"])
    for case in data["cases"]:
        assert case["pass"] == (case["residual"] <= case["tolerance"])


@pytest.mark.parametrize(
    "args",
    [
        ["nonsense"],
        ["flat-group", "--order", "1"],
        ["flat-group", "--tol", "0"],
        ["flat-group", "--points", "0"],
        ["flat-group", "--n", "x"],
        ["conformal-invariance", "--u", "0.3*q1"],
        ["conformal-invariance", "--u", "[[1.0, [1]]"],
        ["compat", "--spec", "/nonexistent.json"],
    ],
)
def test_config_errors_exit_2(args, capsys):
    code, out = run(args, capsys)
    assert code == 2
    assert "error" in out.err


def test_log_level_must_be_known(monkeypatch, capsys):
    monkeypatch.setenv("PARACONTACT_LOG", "loud")
    assert run(["flat-group"], capsys)[0] == 2


def test_failures_exit_1(capsys):
    # a loose tolerance passes, an impossible one fails
    assert run(["yamabe", "--points", "3", "--tol", "1e-3"], capsys)[0] == 0
    code, out = run(["yamabe", "--points", "3", "--tol", "1e-300"], capsys)
    assert code == 1
    assert "FAIL" in out.out


def test_numerical_errors_are_recorded_per_case(monkeypatch):
    calls = {"n": 0}
    original = suites.curvature.curvature_tensor

    def flaky(conn, ev):
        calls["n"] += 1
        if calls["n"] == 2:
            raise OrderExhausted("synthetic")
        return original(conn, ev)

    monkeypatch.setattr(suites.curvature, "curvature_tensor", flaky)
    rep = run_suite(RunConfig("flat-group", points=4))
    failed = rep.failures()
    assert len(failed) == 1 and failed[0].error == "OrderExhausted"
    assert {c.index for c in rep.cases} == {0, 1, 2, 3}


def test_user_spec_file(tmp_path, capsys):
    path = tmp_path / "g.json"
    path.write_text(models.heisenberg_spec(1).to_json())
    assert run(["compat", "--spec", str(path), "--points", "3"], capsys)[0] == 0
    assert run(["conformal-invariance", "--spec", str(path), "--u", "0.2*u1*t", "--points", "2"], capsys)[0] == 0


def test_monomial_list_factor(capsys):
    assert run(["conformal-invariance", "--u", "[[0.3, [1, 0, 1]]]", "--points", "2"], capsys)[0] == 0


@pytest.mark.parametrize("suite", ["compat", "yamabe", "kelvin", "cayley", "conformal-invariance"])
def test_reports_are_deterministic(suite, tmp_path, capsys):
    paths = [tmp_path / f"{k}.json" for k in range(2)]
    for p in paths:
        cli.main([suite, "--points", "3", "--seed", "7", "--out", str(p)])
    assert paths[0].read_bytes() == paths[1].read_bytes()
    other = tmp_path / "other.json"
    cli.main([suite, "--points", "3", "--seed", "8", "--out", str(other)])
    assert other.read_bytes() != paths[0].read_bytes()


def test_run_config_validation():
    with pytest.raises(ConfigError):
        RunConfig("flat-group", order=1).validate()
    with pytest.raises(ConfigError):
        RunConfig("unknown").validate()


def test_report_json_sorted():
    rep = ResidualReport("x")
    rep.add("b", 1e-3, 1e-2, index=1)
    rep.add("a", float("nan"), 1e-2, error="Boom")
    rep.add("b", 0.5, 1e-2, index=0)
    d = json.loads(rep.to_json())
    assert [(c["name"], c.get("error")) for c in d["cases"]] == [("a", "Boom"), ("b", None), ("b", None)]
    assert [c["pass"] for c in d["cases"]] == [False, False, True]
    assert d["summary"] == {"total": 3, "passed": 1, "max_residual": 0.5}


def test_console_script_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "paracontact.cli", "flat-group", "--points", "2"], capture_output=True, text=True
    )
    assert out.returncode == 0
    assert out.stdout.strip().startswith("flat-group:")
