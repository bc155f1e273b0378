"""Command line, config precedence, reports and replay."""

import csv
import json
import re

import pytest
from click.testing import CliRunner

from uplift.cli import main
from uplift.errors import SpecError
from uplift.experiments import EXPERIMENTS, judge, rejudge, resolve_parameters, run_experiment


def invoke(*args):
    result = CliRunner().invoke(main, list(args), catch_exceptions=False)
    return result


def test_elect_table_and_report(tmp_path):
    out = tmp_path / "elect.json"
    result = invoke("--seed", "4", "--trials", "300", "--out", str(out), "elect")
    assert result.exit_code == 0
    assert "experiment  elect" in result.output and "overall     PASS" in result.output
    report = json.loads(out.read_text())
    assert report["seed"] == 4 and report["trials"] == 300
    assert report["parameters"]["n"] == 2000


def test_replay_identical(tmp_path):
    out = tmp_path / "attack.json"
    assert invoke("--out", str(out), "attack", "--protocol", "xor-3").exit_code == 0
    result = invoke("replay", str(out))
    assert result.exit_code == 0 and "replay identical" in result.output


def test_replay_detects_tampering(tmp_path):
    out = tmp_path / "elect.json"
    invoke("--trials", "100", "--out", str(out), "elect")
    report = json.loads(out.read_text())
    report["measured"]["failures"] = 1
    out.write_text(json.dumps(report))
    assert invoke("replay", str(out)).exit_code == 1
    report["verdicts"]["failure_rate_within_err"] = False
    out.write_text(json.dumps(report))
    assert invoke("replay", str(out)).exit_code == 1


def test_config_precedence(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"seed": 9, "trials": 50, "elect": {"n": 500, "n_prime": 50}}))
    out = tmp_path / "r.json"
    invoke("--config", str(config), "--out", str(out), "elect", "--n-prime", "25")
    report = json.loads(out.read_text())
    assert report["seed"] == 9 and report["trials"] == 50
    assert report["parameters"]["n"] == 500 and report["parameters"]["n_prime"] == 25
    invoke("--config", str(config), "--seed", "1", "--out", str(out), "elect")
    assert json.loads(out.read_text())["seed"] == 1


def test_bad_config_is_reported(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"elect": {"colour": 1}}))
    result = invoke("--config", str(config), "elect")
    assert result.exit_code != 0 and "colour" in result.output


def test_csv_rows(tmp_path):
    rows = tmp_path / "rows.csv"
    invoke("--trials", "30", "--csv", str(rows), "uplift", "--t-prime", "2")
    with open(rows) as fh:
        data = list(csv.DictReader(fh))
    assert len(data) == 30
    assert {row["calls"] for row in data} == {"3"}


def test_uplift_or_reports_correctness(tmp_path):
    out = tmp_path / "or.json"
    invoke("--trials", "10", "--out", str(out), "uplift", "--functionality", "or", "--n", "8")
    report = json.loads(out.read_text())
    assert report["verdicts"]["or_correct"] and report["measured"]["correct_rate"] == 1.0


def test_subcommittees_command():
    result = invoke("--trials", "20", "subcommittees", "--runs", "2")
    assert result.exit_code == 0 and re.search(r"^\s+ell\s+1820$", result.output, re.M)


@pytest.mark.parametrize("name", sorted(EXPERIMENTS))
def test_judge_agrees_with_rejudge(name):
    trials = 1 if name == "attack" else 20
    report, _ = run_experiment(name, {"protocol": "xor-2"} if name == "attack" else {}, 3, trials)
    assert rejudge(report) == report["verdicts"] == judge(name, report["parameters"], report["measured"],
                                                          report["bounds"])


def test_reports_byte_identical_on_rerun():
    first, _ = run_experiment("uplift", {}, 5, 30)
    second, _ = run_experiment("uplift", {}, 5, 30)
    assert json.dumps(first, sort_keys=True) == json.dumps(second, sort_keys=True)


def test_unknown_parameter_rejected():
    with pytest.raises(SpecError):
        resolve_parameters("elect", {"m": 3})
    with pytest.raises(SpecError):
        run_experiment("nope")
