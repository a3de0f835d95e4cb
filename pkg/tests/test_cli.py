import csv
import json
import subprocess
import sys
from importlib import resources

import numpy as np
import pytest

from archicens import cli
from archicens.copulas import alpha_from_tau, independence
from archicens.data import UNIT_EXPONENTIAL, Sample, SimulationConfig, calibrate_censoring, save_csv, simulate_censored

jsonschema = pytest.importorskip("jsonschema")


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write_sample(path, cop, n, seed, target=0.2):
    if target:
        c1, c2 = calibrate_censoring(cop, (UNIT_EXPONENTIAL, UNIT_EXPONENTIAL), target, "double")
    else:
        c1 = c2 = None
    save_csv(simulate_censored(SimulationConfig(cop, n, censor1=c1, censor2=c2, seed=seed)), path)
    return path


def read_columns(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], np.array(rows[1:], float)
    return {h: body[:, i] for i, h in enumerate(head)}


@pytest.fixture(scope="module")
def gumbel_csv(tmp_path_factory):
    return write_sample(tmp_path_factory.mktemp("d") / "gumbel.csv", alpha_from_tau("gumbel", 0.4), 150, 3)


# ---- errors ------------------------------------------------------------------------------


def test_empty_file_is_input_error(tmp_path, capsys):
    p = tmp_path / "empty.csv"
    p.write_text("")
    code, out, err = run(capsys, "fit", p)
    assert code == 2 and out == ""
    e = json.loads(err)["error"]
    assert e["class"] == "input" and "no observations" in e["message"]


def test_bad_row_reports_line(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("y1,y2,delta1,delta2\n1,2,1,1\n1,2,7,1\n")
    code, _, err = run(capsys, "fit", p)
    assert code == 2 and json.loads(err)["error"]["line"] == 3


def test_missing_file_and_missing_seed(tmp_path, gumbel_csv, capsys):
    code, _, err = run(capsys, "fit", tmp_path / "nope.csv")
    assert code == 2 and json.loads(err)["error"]["type"] == "FileNotFoundError"
    code, _, err = run(capsys, "select", gumbel_csv, "--B", "3")
    assert code == 2 and "--seed" in json.loads(err)["error"]["message"]


@pytest.mark.parametrize(
    "argv",
    [["reproduce-table", "9", "--seed", "1"], ["fit"], ["select", "x.csv", "--B", "-1"], ["fit", "x.csv", "--candidates", "t"]],
)
def test_argument_errors_exit_2_with_json(capsys, argv):
    with pytest.raises(SystemExit) as info:
        cli.main(argv)
    assert info.value.code == 2
    assert json.loads(capsys.readouterr().err)["error"]["class"] == "input"


def test_numerical_failure_exit_3(monkeypatch, gumbel_csv, capsys):
    def boom(*a, **k):
        raise FloatingPointError("overflow in generator")

    monkeypatch.setattr(cli, "select", boom)
    code, _, err = run(capsys, "fit", gumbel_csv)
    assert code == 3 and json.loads(err)["error"]["class"] == "numerical"


# ---- select / fit ------------------------------------------------------------------------


def test_select_report_validates_and_is_reproducible(tmp_path, gumbel_csv, capsys):
    schema = json.loads(resources.files("archicens").joinpath("report.schema.json").read_text())
    outs = []
    for k in range(2):
        d = tmp_path / f"o{k}"
        code, out, _ = run(capsys, "select", gumbel_csv, "--B", "4", "--M", "2", "--seed", "11", "--out", d)
        assert code == 0
        report = json.loads(out)
        jsonschema.validate(report, schema)
        assert (d / "report.json").read_text() == out
        outs.append(((d / "report.json").read_bytes(), (d / "curves.csv").read_bytes()))
    assert outs[0] == outs[1]
    assert report["config"]["seed"] == 11 and report["config"]["kernel"] == "epanechnikov"
    assert report["config"]["w"] == 0.5 and report["config"]["nu0"] == 0.5
    cols = read_columns(tmp_path / "o0" / "curves.csv")
    assert list(cols) == [
        "nu", "K_hat", "lambda_hat", "clayton_K", "clayton_lambda", "frank_K", "frank_lambda",
        "gumbel_K", "gumbel_lambda", "joe_K", "joe_lambda", "phi_hat",
    ]


def test_fit_is_deterministic_without_seed(gumbel_csv, capsys):
    a = run(capsys, "fit", gumbel_csv, "--candidates", "gumbel,joe")
    b = run(capsys, "fit", gumbel_csv, "--candidates", "gumbel,joe")
    assert a == b and a[0] == 0
    fits = json.loads(a[1])["fits"]
    assert [f["family"] for f in fits] == ["gumbel", "joe"]
    assert all(f["pseudo_p"] is None and f["gof_p"] is None for f in fits)


def test_comonotone_toy_data(tmp_path, capsys):
    x = np.arange(1.0, 31.0)
    save_csv(Sample.complete(x, x), tmp_path / "c.csv")
    code, out, _ = run(capsys, "fit", tmp_path / "c.csv", "--estimator", "auto")
    rep = json.loads(out)
    assert code == 0 and rep["tau_hat"] > 0.95
    for f in rep["fits"]:
        assert f["alpha_hat"] > 20


def test_svg_is_byte_identical(tmp_path, gumbel_csv, capsys):
    pytest.importorskip("matplotlib")
    blobs = []
    for k in range(2):
        d = tmp_path / f"s{k}"
        assert run(capsys, "curves", gumbel_csv, "--out", d, "--svg")[0] == 0
        blobs.append((d / "curves.svg").read_bytes())
    assert blobs[0] == blobs[1] and blobs[0].startswith(b"<?xml")


# ---- curves ------------------------------------------------------------------------------


def test_curves_independence_candidates_coincide(tmp_path, capsys):
    p = write_sample(tmp_path / "ind.csv", independence(), 2000, 5, target=0)
    code, out, _ = run(capsys, "curves", p, "--estimator", "auto")
    assert code == 0
    lines = out.strip().splitlines()
    head = lines[0].split(",")
    body = np.array([l.split(",") for l in lines[1:]], float)
    lam = np.array([body[:, head.index(f"{f}_lambda")] for f in ("clayton", "frank", "gumbel", "joe")])
    assert np.max(lam.max(axis=0) - lam.min(axis=0)) <= 0.01


def test_curves_gumbel_sample_nearest_gumbel_majority(tmp_path, capsys):
    wins = 0
    for seed in range(7):
        p = write_sample(tmp_path / f"g{seed}.csv", alpha_from_tau("gumbel", 0.4), 1000, seed)
        assert run(capsys, "curves", p, "--out", tmp_path / f"c{seed}")[0] == 0
        c = read_columns(tmp_path / f"c{seed}" / "curves.csv")
        dnu = np.diff(c["nu"], prepend=0.0)
        d = {f: np.sum((c["K_hat"] - c[f"{f}_K"]) ** 2 * dnu) for f in ("clayton", "frank", "gumbel", "joe")}
        wins += min(d, key=d.get) == "gumbel"
    assert wins >= 4


# ---- gof, simulate, reproduce-table ------------------------------------------------------


def test_gof_command(gumbel_csv, capsys):
    code, out, _ = run(capsys, "gof", gumbel_csv, "--family", "gumbel", "--M", "3", "--seed", "2")
    g = json.loads(out)
    assert code == 0 and 0 <= g["p_value"] <= 1 and len(g["z_values"]) == 3
    assert run(capsys, "gof", gumbel_csv, "--family", "gumbel", "--M", "3", "--seed", "2")[1] == out
    code, out, _ = run(capsys, "gof", gumbel_csv, "--family", "clayton", "--alpha", "2", "--M", "1", "--seed", "2")
    assert code == 0 and json.loads(out)["alpha"] == 2.0 and json.loads(out)["tau_hat"] is None


def test_simulate_scenario_file_byte_identical(tmp_path, capsys):
    spec = tmp_path / "s.ini"
    spec.write_text("family = frank\ntau = 0.4\nn = 60\nscenario = double\ncensored_fraction = 0.2\nseed = 3\n")
    blobs = []
    for k in range(2):
        d = tmp_path / f"sim{k}"
        code, out, _ = run(capsys, "simulate", spec, "--out", d, "--replicates", "2")
        assert code == 0 and json.loads(out)["files"] == ["sample_0000.csv", "sample_0001.csv"]
        blobs.append([(d / f).read_bytes() for f in json.loads(out)["files"]])
    assert blobs[0] == blobs[1] and blobs[0][0] != blobs[0][1]


def test_reproduce_table_single_replicate(tmp_path, capsys):
    code, out, _ = run(capsys, "reproduce-table", "4", "--replicates", "1", "--n", "100", "--seed", "1", "--out", tmp_path)
    assert code == 0 and out.startswith("# independence")
    rows = list(csv.DictReader(open(tmp_path / "table_4.csv")))
    assert [r["family"] for r in rows] == ["clayton", "frank", "gumbel", "joe"]
    assert all(r["mc_se"] in ("", "nan") for r in rows)
    code, out, _ = run(capsys, "reproduce-table", "7", "--n", "80", "--B", "2", "--seed", "1", "--out", tmp_path)
    assert code == 0 and len(list(csv.DictReader(open(tmp_path / "table_7.csv")))) == 1


def test_reproduce_table_rejects_unknown_knob(capsys):
    code, _, err = run(capsys, "reproduce-table", "7", "--replicates", "3", "--seed", "1")
    assert code == 2 and "--replicates" in json.loads(err)["error"]["message"]


def test_console_script_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "archicens.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip().endswith("0.1.0")
