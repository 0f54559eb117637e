import argparse
import io
import json
import math
import shutil
import subprocess

import jsonschema
import numpy as np
import pytest

from realginibre import cli, series


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def run_json(schema, *argv):
    code, out, err = run(*argv)
    assert code == 0, err
    doc = json.loads(out)
    jsonschema.validate(doc, cli.load_schema(schema))
    return doc


def test_expected_anchors():
    assert run_json("expected", "expected", "--n", "2", "--tau", "0")["value"] == pytest.approx(math.sqrt(2), abs=1e-12)
    four = run_json("expected", "expected", "--n", "4", "--tau", "0")
    assert four["value"] == pytest.approx(11 * math.sqrt(2) / 8, abs=1e-12)


def test_expected_routes():
    a = run_json("expected", "expected", "--n", "128", "--alpha", "1")
    b = run_json("expected", "expected", "--n", "128", "--alpha", "1", "--route", "residue")
    c = run_json("expected", "expected", "--n", "128", "--alpha", "1", "--route", "asymptotic", "--order", "3")
    assert a["value"] == pytest.approx(b["value"], rel=1e-12)
    assert c["value"] == pytest.approx(a["value"], abs=1e-4)
    assert len(c["terms"]) == 4 and a["alpha"] == 1.0
    d = run_json("expected", "expected", "--n", "1024", "--tau", "0.5", "--route", "asymptotic")
    assert d["terms"][0]["label"] == "leading"


def test_json_floats_carry_17_digits():
    _, out, _ = run("expected", "--n", "2", "--tau", "0")
    value = out.split('"value": ')[1].split(",")[0]
    assert len(value.replace(".", "").lstrip("0")) == 17
    assert cli.dumps({"a": 0.1, "b": [1.0, 2], "c": float("nan")}) == '{\n  "a": 0.10000000000000001,\n  "b": [1.0, 2],\n  "c": null\n}'


@pytest.mark.parametrize(
    "argv,flag",
    [
        (["expected", "--n", "3", "--tau", "0"], "--n"),
        (["expected", "--n", "4", "--tau", "1.2"], "--tau"),
        (["expected", "--n", "4", "--alpha", "3"], "--alpha"),
        (["expected", "--n", "4"], "--tau|--alpha"),
        (["expected", "--n", "4", "--tau", "0.1", "--alpha", "1"], "--alpha"),
        (["expected", "--n", "x", "--tau", "0"], "--n"),
        (["expected", "--n", "8", "--tau", "0.5", "--route", "asymptotic", "--order", "12"], "--order"),
        (["density", "--n", "4096", "--tau", "0.5"], "--n"),
        (["density", "--n", "64", "--alpha", "1", "--grid", "1:0:5"], "--grid"),
        (["variance", "--n", "1000", "--alpha", "1"], "--n"),
        (["sample", "--n", "8", "--tau", "0.5", "--samples", "0"], "--samples"),
        (["sample", "--preset", "fig9"], "--preset"),
        (["sample", "--preset", "fig3:alpha=-1"], "--preset"),
        (["coeffs", "--kind", "q", "--k", "3", "--count", "500"], "--count"),
        (["coeffs", "--kind", "zeta"], "--kind"),
    ],
)
def test_validation_errors_exit_two_with_one_line(argv, flag):
    code, out, err = run(*argv)
    assert code == 2
    assert out == ""
    lines = err.strip().splitlines()
    assert len(lines) == 1
    assert lines[0].startswith(f"error flag={flag} ")
    assert "accepted=" in lines[0]


def test_density_csv_integrates_to_one():
    code, out, _ = run("density", "--n", "256", "--alpha", "1", "--route", "exact", "--out", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "x,rho,route"
    data = np.array([[float(v) for v in ln.split(",")[:2]] for ln in lines[1:]])
    assert data.shape == (401, 2)
    trap = getattr(np, "trapezoid", None) or np.trapz
    assert abs(trap(data[:, 1], data[:, 0]) - 1) < 1e-4


def test_density_json_and_limit():
    doc = run_json("density", "density", "--n", "64", "--alpha", "2", "--grid", "-2:2:41", "--out", "json")
    assert len(doc["x"]) == 41 and doc["route"] == "exact"
    lim = run_json("density", "density", "--alpha", "2", "--route", "limit", "--format", "json")
    assert lim["route"] == "limit"
    sym = run_json("density", "density", "--tau", "1", "--route", "limit", "--format", "json")
    assert sym["rho"][200] == pytest.approx(1 / math.pi)


def test_density_written_to_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("RGINIBRE_OUT_DIR", str(tmp_path))
    code, out, _ = run("density", "--n", "16", "--tau", "0.5", "--out", "sub/rho.csv")
    assert code == 0 and out == ""
    assert (tmp_path / "sub" / "rho.csv").read_text().startswith("x,rho,route\n")


def test_variance():
    doc = run_json("variance", "variance", "--n", "64", "--alpha", "1")
    assert doc["ratio"] == pytest.approx(doc["v"] / doc["e"])
    assert abs(doc["ratio"] - doc["r_alpha"]) < 0.01
    s = run_json("variance", "variance", "--n", "8", "--tau", "0.3", "--route", "sum")
    q = run_json("variance", "variance", "--n", "8", "--tau", "0.3")
    assert s["v"] == pytest.approx(q["v"], rel=1e-6)


def test_sample_is_determined_by_seed(tmp_path, monkeypatch):
    monkeypatch.setenv("RGINIBRE_OUT_DIR", str(tmp_path))
    args = ["sample", "--n", "24", "--alpha", "1", "--samples", "40", "--seed", "7"]
    a = run(*args, "--hist", "h1.csv", "--scatter", "s1.csv", "--threads", "1")
    b = run(*args, "--hist", "h2.csv", "--scatter", "s2.csv", "--threads", "3")
    assert a[0] == b[0] == 0
    assert a[1] == b[1]
    assert (tmp_path / "h1.csv").read_text() == (tmp_path / "h2.csv").read_text()
    assert (tmp_path / "s1.csv").read_text() == (tmp_path / "s2.csv").read_text()
    assert (tmp_path / "h1.csv").read_text().startswith("bin_lo,bin_hi,count\n")
    assert (tmp_path / "s1.csv").read_text().startswith("re,im\n")
    doc = json.loads(a[1])
    jsonschema.validate(doc, cli.load_schema("sample"))
    assert doc["parity_ok"] and doc["seed"] == 7
    c = run(*args[:-1], "8")
    assert c[1] != a[1]


def test_sample_writes_stats_file(tmp_path):
    path = tmp_path / "stats.json"
    code, out, _ = run("sample", "--n", "8", "--tau", "0.5", "--samples", "10", "--dist", "rademacher", "--out", str(path))
    assert code == 0 and out == ""
    jsonschema.validate(json.loads(path.read_text()), cli.load_schema("sample"))


@pytest.mark.parametrize(
    "preset,want",
    [
        ("fig1", dict(n=4096, tau=0.5, samples=1, scatter="scatter.csv")),
        ("fig2a", dict(n=256, alpha=1.0, samples=256)),
        ("fig2b", dict(n=64, alpha=1.0, samples=100_000)),
        ("fig3:alpha=2", dict(n=256, alpha=2.0, samples=256, hist="hist.csv")),
        ("fig3:alpha=0", dict(n=256, alpha=0.0, samples=256, hist="hist.csv")),
    ],
)
def test_presets_expand_to_figure_parameters(preset, want):
    ns = argparse.Namespace(preset=preset, n=None, tau=None, alpha=None, samples=None, hist=None, scatter=None)
    cli._apply_preset(ns)
    for key, val in want.items():
        assert getattr(ns, key) == val


def test_symmetric_preset_compares_with_semicircle(tmp_path):
    path = tmp_path / "s.json"
    code, _, err = run("sample", "--n", "32", "--alpha", "0", "--samples", "20", "--out", str(path))
    assert code == 0, err
    doc = json.loads(path.read_text())
    assert doc["tau"] == 1.0 and doc["count_mean"] == 32
    assert "histogram_tv" in doc["reference"]


def test_coeffs():
    doc = run_json("coeffs", "coeffs", "--kind", "a_l", "--count", "5")
    assert doc["values"][1:] == ["-3/8", "-3/128", "27/1024", "499/32768"]
    q = run_json("coeffs", "coeffs", "--kind", "q", "--k", "3", "--count", "5")
    tab = series.CoefficientTable.from_dict(q)
    assert tab.regenerate() == tab
    for kind, k in (("p_hat", 2), ("p", 4), ("a_k", 0), ("a_k_n", 1), ("d_s", 2), ("c_l", 2)):
        run_json("coeffs", "coeffs", "--kind", kind, "--k", str(k), "--count", "6")
    half = run_json("coeffs", "coeffs", "--kind", "a_l", "--tau", "0.5", "--count", "4")
    assert half["values"][3] == "-467/1024"


@pytest.fixture(scope="module")
def verify_output():
    return run("verify", "--suite", "identities")


def test_verify_reports_every_identity_exact(verify_output):
    code, out, _ = verify_output
    assert code == 0
    lines = out.strip().splitlines()
    assert all(ln.startswith("exact") for ln in lines[:-1])
    assert any("central binomial double sum k=200" in ln for ln in lines)
    assert any("a_40 recombination" in ln for ln in lines)
    assert lines[-1].endswith("identities exact")


def test_verify_json_and_failure_exit(monkeypatch, tmp_path):
    def fake(suite):
        yield "one", True, ""
        yield "two", False, "off by one"

    monkeypatch.setattr(cli, "_identity_checks", fake)
    code, out, _ = run("verify", "--json")
    assert code == 1
    doc = json.loads(out)
    jsonschema.validate(doc, cli.load_schema("verify"))
    assert doc["failed"] == 1 and doc["checks"][1]["status"] == "FAILED"


@pytest.mark.skipif(shutil.which("realginibre") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["realginibre", "expected", "--n", "2", "--tau", "0"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["value"] == pytest.approx(math.sqrt(2))
    bad = subprocess.run(["realginibre", "expected", "--n", "3", "--tau", "0"], capture_output=True, text=True)
    assert bad.returncode == 2 and bad.stderr.count("\n") == 1
