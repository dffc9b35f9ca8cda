import csv
import json
import subprocess
import sys

import pytest

from qotlab import acceptance, cli
from qotlab.acceptance import CriterionResult
from qotlab.harness import CSV_HEADER


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_run_json_to_stdout(capsys):
    code, out, _ = run(["run", "--scenario", "honest-aon", "--n", "12", "--trials", "10", "--seed", "3"], capsys)
    assert code == 0
    rec = json.loads(out)
    assert rec["scenario"] == "honest-aon" and rec["trials"] == 10


def test_run_csv_to_file(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code, _, _ = run(["run", "--scenario", "cheat-aon", "--n", "10", "--trials", "4", "--bc-mode", "bccc",
                      "--format", "csv", "--out", str(out)], capsys)
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == CSV_HEADER and rows[1][0] == "cheat-aon"


def test_run_same_seed_same_bytes(tmp_path, capsys):
    args = ["run", "--scenario", "cheat-12ot-t0", "--n", "10", "--trials", "5", "--seed", "77", "--out"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(args + [str(a)], capsys)[0] == 0
    assert run(args + [str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_variant_override(capsys):
    code, out, _ = run(["run", "--scenario", "honest-aon", "--n", "10", "--trials", "5", "--variant", "12ot"], capsys)
    assert code == 0
    assert "joint_accuracy" in json.loads(out)["metrics"]


def test_bad_config_exit_code(capsys):
    code, _, err = run(["run", "--scenario", "honest-aon", "--n", "4", "--trials", "2"], capsys)
    assert code == 2 and "n must be at least 8" in err
    code, _, _ = run(["run", "--scenario", "cheat-12ot-t1", "--variant", "aon", "--trials", "2"], capsys)
    assert code == 2


def test_write_error_exit_code(tmp_path, capsys):
    code, _, err = run(["run", "--scenario", "honest-aon", "--n", "10", "--trials", "2",
                        "--out", str(tmp_path / "no" / "x.json")], capsys)
    assert code == 4 and "cannot write" in err


@pytest.mark.parametrize("argv", [
    ["run", "--scenario", "bogus"],
    ["run", "--scenario", "honest-aon", "--seed", "-1"],
    ["run", "--scenario", "honest-aon", "--trials", "0"],
    ["run", "--scenario", "honest-aon", "--format", "xml"],
    [],
])
def test_argument_errors(argv):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == 2


def test_verify_exit_codes(monkeypatch, capsys):
    ok = CriterionResult(1, "fake", True, "fine")
    bad = CriterionResult(2, "fake", False, "broken")
    monkeypatch.setattr(acceptance, "CRITERIA", (lambda: ok,))
    assert cli.main(["verify"]) == 0
    assert "[PASS]" in capsys.readouterr().out
    monkeypatch.setattr(acceptance, "CRITERIA", (lambda: ok, lambda: bad))
    assert cli.main(["verify"]) == 1
    out = capsys.readouterr().out
    assert "[FAIL]" in out and "1/2 criteria passed" in out


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "qotlab.cli", "run", "--scenario", "lo-ideal", "--trials", "2"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["match_rate"] == 1.0
