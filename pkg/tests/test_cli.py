import csv
import io
import json
import subprocess
import sys

import pytest

from qlm.cli import main

ROUND = """
tau = 0.5
[metric]
type = "round"
r_o = 1.0
"""

BUMP = """
tau = 0.8
[metric]
type = "axisym"
r_o = 1.0
w = {{basis = "poly", data = [{a}, 0.0, {b}]}}
"""


def bump_cfg(eps, extra=""):
    return BUMP.format(a=1 + eps, b=-eps) + extra


@pytest.fixture
def write(tmp_path):
    def _w(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return _w


def run(argv, capsys):
    code = main(argv)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_analyze_round(write, capsys):
    code, out, _ = run(["analyze", write("r.toml", ROUND)], capsys)
    assert code == 0
    d = json.loads(out)
    assert d["flat"]["theta"] == 1.0
    assert d["flat"]["bartnik_upper_bound"]["value"] == 0.375
    assert d["flat"]["hawking_mass"]["value"] == 0.375
    assert d["schema_version"] == "1.0"


def test_analyze_beta_nonpositive(write, tmp_path, capsys):
    out = tmp_path / "rep.json"
    code, _, err = run(["analyze", write("b.toml", bump_cfg(0.4)), "--out", str(out)], capsys)
    assert code == 2
    assert json.loads(err)["reason"] == "beta_nonpositive"
    assert not out.exists()
    assert list(tmp_path.glob("*.tmp")) == []


def test_analyze_deterministic(write, tmp_path, capsys):
    cfg = write("c.toml", bump_cfg(0.1, 'r_h = 0.4\nbrown_york = true\nfamily = {reparam_grid = 4}\n'))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["analyze", cfg, "--out", str(a)]) == 0
    assert main(["analyze", cfg, "--out", str(b), "--threads", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_analyze_json_config_and_metric_file(write, capsys):
    write("metric.json", json.dumps({"type": "axisym", "r_o": 2.0, "w": {"basis": "poly", "data": [1.1, 0, -0.1]}}))
    cfg = write("c.json", json.dumps({"metric": "metric.json", "H_o": 0.5}))
    code, out, _ = run(["analyze", cfg], capsys)
    assert code == 0
    assert json.loads(out)["tau"] == pytest.approx(0.5)


def test_analyze_hyperbolic(write, capsys):
    code, out, _ = run(["analyze", write("h.toml", 'pipeline = "hyperbolic"\nkappa = 0.5\n' + bump_cfg(0.3))], capsys)
    assert code == 0
    d = json.loads(out)["hyperbolic"]
    assert d["xi_estimate"]["case"] == "curvature_nonpositive"
    assert d["kappa"]["units"] == "length^-1"


@pytest.mark.parametrize(
    "text",
    [
        "tau = 0.5\nH_o = 1.0\n[metric]\ntype='round'\nr_o=1\n",
        "pipeline = 'hyperbolic'\ntau = 0.5\n[metric]\ntype='round'\nr_o=1\n",
        "tau = 0.5\nkappa = 1.0\n[metric]\ntype='round'\nr_o=1\n",
        "tau = 0.5\n[metric\n",
        "tau = -0.5\n[metric]\ntype='round'\nr_o=1\n",
        "tau = 0.5\nmetric = 'missing.json'\n",
    ],
)
def test_config_errors(write, capsys, text):
    code, _, err = run(["analyze", write("e.toml", text)], capsys)
    assert code == 1
    assert json.loads(err)["status"] == "error"


def test_missing_file(capsys):
    assert run(["analyze", "/nonexistent/x.toml"], capsys)[0] == 1


def test_collar_round(write, capsys):
    code, out, _ = run(["collar", write("r.toml", ROUND + "[collar]\nm = -100\n")], capsys)
    assert code == 0
    d = json.loads(out)["collar"]
    assert d["R_certificate"]["certified"]
    assert all(g["min_R"] >= 0 for g in d["R_certificate"]["grids"])


def test_collar_sample_and_breach(write, tmp_path, capsys):
    code, out, _ = run(["collar", write("c.toml", bump_cfg(0.1, "[collar]\nm = -100\n"))], capsys)
    assert code == 0
    d = json.loads(out)["collar"]
    assert d["A_residual"] < 1e-10 and d["A_bracket"]["satisfied"]
    assert max(abs(s["hawking_mass"] - s["hawking_mass_formula"]) for s in d["slices"]) < 1e-9
    code, out, _ = run(["collar", write("h.toml", bump_cfg(0.1, "[collar]\nm = -100\nA_scale = 0.5\n"))], capsys)
    assert code == 3
    assert json.loads(out)["status"] == "breach"


def test_collar_precondition(write, capsys):
    code, _, err = run(["collar", write("p.toml", bump_cfg(0.1, "[collar]\nm = -0.01\n"))], capsys)
    assert code == 2
    assert json.loads(err)["reason"] == "eq-bak"


def test_collar_limit_mode(write, capsys):
    seq = "[collar]\nm_sequence = [-1e2, -1e3, -1e4, -1e5, -1e6, -1e7, -1e8]\n"
    code, out, _ = run(["collar", write("l.toml", bump_cfg(0.1, seq))], capsys)
    assert code == 0
    ls = json.loads(out)["limit_study"]
    assert ls["monotone_dev_u"]
    assert ls["rows"][-1]["dev_u"] < 1e-4


def test_collar_needs_m(write, capsys):
    assert run(["collar", write("r.toml", ROUND)], capsys)[0] == 1


def test_collar_grid_flag(write, capsys):
    code, out, _ = run(["collar", write("c.toml", bump_cfg(0.1, "[collar]\nm = -100\n")), "--grid", "11x17"], capsys)
    assert code == 0
    g = json.loads(out)["collar"]["R_certificate"]["grids"]
    assert (g[0]["n_t"], g[0]["n_x"], g[1]["n_t"], g[1]["n_x"]) == (11, 17, 21, 33)


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_sweep_tau_axis(write, capsys):
    spec = write("s.toml", 'axes = [{name = "tau", start = 0.0, stop = 1.0, num = 11}]\nbase = {zeta = 0.0}\n')
    code, out, _ = run(["sweep", spec], capsys)
    assert code == 0
    rows = _rows(out)
    assert len(rows) == 11
    assert all(float(r["theta"]) == 1.0 for r in rows)


def test_sweep_two_axes_monotone_and_ordered(write, capsys):
    spec = write(
        "s.toml",
        'axes = [{name = "tau", values = [0.1, 0.5, 0.9]}, {name = "zeta", start = 0, stop = 1, num = 6}]\n'
        "base = {beta = 0.8}\n",
    )
    rows = _rows(run(["sweep", spec], capsys)[1])
    keys = [(float(r["tau"]), float(r["zeta"])) for r in rows]
    assert keys == sorted(keys)
    for tau in (0.1, 0.5, 0.9):
        b = [float(r["bartnik_upper"]) for r in rows if float(r["tau"]) == tau]
        assert all(y >= x for x, y in zip(b, b[1:]))


def test_sweep_ccmm_region_and_reasons(write, capsys):
    spec = write(
        "s.toml",
        'axes = [{name = "tau", values = [0.1, 0.95]}, {name = "kappa_r_o", values = [0.0, 0.5]}]\n'
        "base = {alpha = 0.05, beta = 0.5}\n",
    )
    rows = _rows(run(["sweep", spec], capsys)[1])
    assert rows[0]["ccmm"] != "" and rows[-1]["ccmm"] == ""
    assert rows[0]["xi"] == "" and rows[1]["xi"] != ""
    bad = write("b.toml", 'axes = [{name = "tau", values = [0.5]}]\nbase = {alpha = 0.05, beta = -0.5}\n')
    r = _rows(run(["sweep", bad], capsys)[1])[0]
    assert r["reason"] == "beta_nonpositive" and r["theta"] == ""


def test_sweep_seventeen_digits_and_threads(write, tmp_path, monkeypatch, capsys):
    spec = write("s.toml", 'axes = [{name = "zeta", start = 0, stop = 2, num = 7}, {name = "rh_over_r_o", values = [0.2, 1.5]}]\nbase = {tau = 0.7}\n')
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", spec, "--out", str(a)]) == 0
    monkeypatch.setenv("QLM_THREADS", "4")
    assert main(["sweep", spec, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    row = _rows(a.read_text())[3]
    assert len(row["theta"].replace(".", "").lstrip("0")) == 17
    assert float(row["theta"]) == float(format(float(row["theta"]), ".17g"))


def test_sweep_bad_spec(write, capsys):
    assert run(["sweep", write("s.toml", 'axes = [{name = "mass", values = [1]}]\n')], capsys)[0] == 1
    assert run(["sweep", write("t.toml", "axes = []\n")], capsys)[0] == 1


def test_module_entry_point(tmp_path):
    p = tmp_path / "r.toml"
    p.write_text(ROUND)
    res = subprocess.run([sys.executable, "-m", "qlm", "analyze", str(p)], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["flat"]["theta"] == 1.0
