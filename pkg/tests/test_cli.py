import csv
import json
import math
import subprocess
import sys

import pytest

from pais_uhlenbeck.cli import main

FIX_A_FLAGS = ["--m", "1", "--omega2", "0.8", "--lambda", "0.2"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def scenario(tmp_path, **fields):
    base = {"parameters": {"m": 1.0, "omega2": 0.8, "lambda": 0.2}, "beta": math.pi / 4,
            "jet": [1.0, 0.0, 0.0, 0.0], "t_end": 5.0, "dt": 1e-3, "method": "rk4", "name": "run"}
    base.update(fields)
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(base))
    return str(path)


def test_classify(capsys):
    code, out = run(capsys, "classify", *FIX_A_FLAGS)
    assert code == 0
    assert out["case"] == "i"
    assert out["w1_sq"] == pytest.approx(4.0) and out["w2_sq"] == pytest.approx(1.0)
    code, out = run(capsys, "classify", "--m", "1", "--omega2", "1", "--lambda", "0.25")
    assert out["case"] == "iv"


def test_exit_codes(capsys):
    assert main(["classify", "--m", "-1", "--omega2", "1", "--lambda", "0.2"]) == 2
    assert main(["classify", "--m", "1"]) == 1
    with pytest.raises(SystemExit) as err:
        main(["classify", "--m", "abc"])
    assert err.value.code == 1
    assert main(["brackets", *FIX_A_FLAGS, "--beta", "0"]) == 3
    assert main(["verify", "--m", "1", "--omega2", "1", "--lambda", "0"]) == 2


def test_integrals_and_brackets(capsys):
    code, out = run(capsys, "integrals", *FIX_A_FLAGS, "--beta", str(math.pi / 4), "--jet", "1", "0", "0", "0")
    assert code == 0
    assert out["H"] == pytest.approx(2 / 3) and out["ratio"] == [2, 1]
    code, out = run(capsys, "brackets", *FIX_A_FLAGS, "--beta", str(math.pi / 4))
    assert out["q_dq"] == pytest.approx(10 / 3)
    assert out["determinant"]["numeric"] == pytest.approx(625)
    assert out["determinant"]["closed_form_printed"] == pytest.approx(36)


def test_darboux(capsys):
    code, out = run(capsys, "darboux", *FIX_A_FLAGS, "--beta", str(math.pi / 4), "--jet", "1", "0", "0", "0")
    assert code == 0
    assert out["canonical"] == pytest.approx([4 / math.sqrt(15), 0, 1 / math.sqrt(15), 0])
    assert out["H_jet"] == pytest.approx(out["H_canonical"])
    assert out["signature"] == "++++"


def test_simulate_writes_files(tmp_path, capsys):
    code, out = run(capsys, "simulate", "--scenario", scenario(tmp_path, t_end=100.0), "--output-dir", str(tmp_path / "o"))
    assert code == 0
    rows = list(csv.reader(open(tmp_path / "o" / "run.csv")))
    assert rows[0] == ["t", "q", "dq", "d2q", "d3q", "J1", "J2", "H", "C"]
    assert len(rows) == 1 + 10001
    report = json.loads((tmp_path / "o" / "run_drift.json").read_text())
    assert max(report["drift"].values()) < 1e-8
    assert report["cross_check"] < 1e-6


def test_simulate_zero_state(tmp_path, capsys):
    run(capsys, "simulate", "--scenario", scenario(tmp_path, jet=[0, 0, 0, 0], t_end=1.0), "--output-dir", str(tmp_path))
    rows = list(csv.reader(open(tmp_path / "run.csv")))[1:]
    assert all(float(v) == 0.0 for r in rows for v in r[1:])


def test_simulate_excluded_beta(tmp_path):
    assert main(["simulate", "--scenario", scenario(tmp_path, beta=0.0), "--output-dir", str(tmp_path)]) == 3


def test_output_dir_precedence(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("PAIS_UHLENBECK_OUTPUT_DIR", str(tmp_path / "env"))
    path = scenario(tmp_path, t_end=0.1, output_dir=str(tmp_path / "file"))
    run(capsys, "simulate", "--scenario", path)
    assert (tmp_path / "env" / "run.csv").exists()
    run(capsys, "simulate", "--scenario", path, "--output-dir", str(tmp_path / "flag"))
    assert (tmp_path / "flag" / "run.csv").exists()
    assert not (tmp_path / "file").exists()


def test_flags_override_scenario(tmp_path, capsys):
    code, out = run(capsys, "classify", "--scenario", scenario(tmp_path), "--lambda", "0.5", "--omega2", "1")
    assert out["case"] == "v"


def test_bad_scenario(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2")
    assert main(["classify", "--scenario", str(bad)]) == 1


def test_scan_beta(tmp_path, capsys):
    code, out = run(capsys, "scan-beta", *FIX_A_FLAGS, "--n", "100", "--output-dir", str(tmp_path))
    assert code == 0 and out["rows"] == 100 and out["excluded_rows"] == 4
    rows = list(csv.DictReader(open(tmp_path / "beta_scan.csv")))
    assert len(rows) == 100
    ok = [r for r in rows if r["status"] == "ok"]
    for label in {r["sector"] for r in ok}:
        pairs = {(r["q_dq"], r["q_d3q"]) for r in ok if r["sector"] == label}
        assert len(pairs) == sum(r["sector"] == label for r in ok)
    sig = {r["sector"]: r["signature"] for r in ok}
    assert sig["(0, pi/2)"] != sig["(-pi/2, 0)"]
    assert main(["scan-beta", *FIX_A_FLAGS, "--n", "0", "--output-dir", str(tmp_path)]) == 1


@pytest.mark.parametrize("flags", [FIX_A_FLAGS, ["--m", "1", "--omega2", "1", "--lambda", "0.25"],
                                   ["--m", "1", "--omega2", "1", "--lambda", "0.5"]])
def test_verify_exit_zero(flags, capsys):
    code, out = run(capsys, "verify", *flags, "--n", "10")
    assert code == 0 and out["audit"]["ok"]


def test_verify_fix_a_statuses(capsys):
    _, out = run(capsys, "verify", *FIX_A_FLAGS, "--n", "5")
    status = {e["id"]: e["status"] for e in out["audit"]["entries"]}
    assert status["bracket-determinant"] == "CorrectedCoefficients"
    assert status["ostrogradski-hamiltonian"] == "CorrectedCoefficients"
    assert status["tilde-map-canonicity"] == "Verified"


def test_entry_point_module(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "pais_uhlenbeck.cli", "classify", *FIX_A_FLAGS],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["regime"] == "oscillatory"
