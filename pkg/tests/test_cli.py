import json
import subprocess
import sys
from importlib.resources import files

import jsonschema
import pytest

from kacbench import cli

QUICK = {
    "attack-classical": ["--n", "6"],
    "attack-walk": ["--n", "6", "--step-budget", "3"],
    "attack-grover-samekey": ["--n", "6"],
    "attack-grover-firstlast": ["--n", "6"],
    "attack-grover-repeated": ["--n", "6"],
    "hybrid": ["--n", "4", "--trials", "3"],
    "bounds": ["--format", "json"],
    "verify": ["--n", "3", "--trials", "1"],
}


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def schema(command):
    return json.loads(files("kacbench").joinpath("schemas", f"{command}.json").read_text())


@pytest.mark.parametrize("command", sorted(QUICK))
def test_output_validates_against_schema(command, capsys, monkeypatch):
    monkeypatch.delenv(cli.OUTPUT_DIR_ENV, raising=False)
    code, out, _ = run([command, *QUICK[command], "--seed", "3"], capsys)
    assert code in (0, 2)
    doc = json.loads(out)
    s = schema(command)
    jsonschema.Draft202012Validator.check_schema(s)
    jsonschema.validate(doc, s, cls=jsonschema.Draft202012Validator)
    assert doc["config"]["seed"] == 3


@pytest.mark.parametrize("command", sorted(QUICK))
def test_same_seed_same_bytes(command, capsys, monkeypatch):
    monkeypatch.delenv(cli.OUTPUT_DIR_ENV, raising=False)
    a = run([command, *QUICK[command], "--seed", "11"], capsys)
    b = run([command, *QUICK[command], "--seed", "11"], capsys)
    assert a == b


def test_workers_do_not_change_results(capsys, monkeypatch):
    monkeypatch.delenv(cli.OUTPUT_DIR_ENV, raising=False)
    argv = ["attack-classical", "--n", "6", "--trials", "4", "--seed", "2"]
    _, one, _ = run(argv, capsys)
    _, two, _ = run(argv + ["--workers", "2"], capsys)
    one, two = json.loads(one), json.loads(two)
    assert one["results"] == two["results"] and one["summary"] == two["summary"]


def test_trial_seeds_are_offsets(capsys, monkeypatch):
    monkeypatch.delenv(cli.OUTPUT_DIR_ENV, raising=False)
    _, both, _ = run(["attack-grover-samekey", "--n", "6", "--trials", "2", "--seed", "5"], capsys)
    _, second, _ = run(["attack-grover-samekey", "--n", "6", "--seed", "6"], capsys)
    assert json.loads(both)["results"][1] == json.loads(second)["results"][0]


def test_bounds_csv_pins_table(capsys, monkeypatch):
    monkeypatch.delenv(cli.OUTPUT_DIR_ENV, raising=False)
    code, out, err = run(["bounds", "--t-max", "2", "--format", "csv"], capsys)
    assert code == 0
    rows = [line.split(",")[:5] for line in out.splitlines()[1:]]
    got = {(r[0], r[1], r[2]): (int(r[3]), int(r[4])) for r in rows}
    assert got[("1", "Q1", "upper")] == (2, 5)
    assert got[("2", "Q1", "upper")] == (3, 5)
    assert got[("2", "Q1", "lower")] == (2, 5)
    assert got[("2", "Q2", "lower")] == (1, 4)
    assert got[("2", "Classical", "upper")] == (2, 3)
    assert '"t_max": 2' in err


def test_mixed_policy_ledger(capsys, monkeypatch):
    monkeypatch.delenv(cli.OUTPUT_DIR_ENV, raising=False)
    _, out, _ = run(["attack-walk", "--n", "8", "--t", "2", "--policy", "mixed:P1",
                     "--step-budget", "4"], capsys)
    per = json.loads(out)["results"][0]["ledger"]["totals"]["per_oracle"]
    assert per["P1"]["quantum"] > 0
    assert per["P2"]["quantum"] == 0 and per["E"]["quantum"] == 0


@pytest.mark.parametrize("argv,flag", [
    (["attack-classical", "--n", "2"], "--n"),
    (["attack-classical", "--beta", "2"], "--beta"),
    (["attack-walk", "--policy", "mixed:P7"], "--policy"),
    (["attack-walk", "--policy", "quantum"], "--policy"),
    (["attack-grover-firstlast", "--t", "3"], "--t"),
    (["attack-grover-repeated", "--j", "9"], "--j"),
    (["hybrid", "--support", "many"], "--support"),
    (["hybrid", "--q-e", "0"], "--q-e"),
    (["bounds", "--format", "xml"], "--format"),
    (["verify", "--n", "7"], "--n"),
    (["attack-classical", "--trials", "0"], "--trials"),
    (["attack-classical", "--bogus", "1"], "--bogus"),
    (["no-such-command"], "no-such-command"),
])
def test_usage_errors_name_the_flag(argv, flag, capsys):
    code, out, err = run(argv, capsys)
    assert code == 1 and out == ""
    assert flag in err


def test_help_exits_zero(capsys):
    code, out, _ = run(["attack-walk", "--help"], capsys)
    assert code == 0 and "--policy" in out


def test_config_file_precedence(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv(cli.OUTPUT_DIR_ENV, raising=False)
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 6, "t": 3, "seed": 4}))
    _, out, _ = run(["attack-grover-samekey", "--config", str(cfg), "--seed", "9"], capsys)
    got = json.loads(out)["config"]
    assert (got["n"], got["t"], got["seed"]) == (6, 3, 9)


@pytest.mark.parametrize("content", ['{"wat": 1}', "[1, 2]", "{not json"])
def test_bad_config_file(tmp_path, capsys, content):
    cfg = tmp_path / "c.json"
    cfg.write_text(content)
    code, _, err = run(["attack-classical", "--config", str(cfg)], capsys)
    assert code == 1 and "--config" in err


def test_output_dir_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
    code, out, _ = run(["bounds", "--seed", "7"], capsys)
    assert code == 0 and out == ""
    assert (tmp_path / "bounds-seed7.csv").read_text().startswith("t,setting")


def test_explicit_output_path(tmp_path, capsys):
    dest = tmp_path / "sub" / "r.json"
    run(["attack-grover-samekey", "--n", "6", "--output", str(dest)], capsys)
    assert json.loads(dest.read_text())["command"] == "attack-grover-samekey"


def test_failed_attack_exits_two(capsys, monkeypatch):
    monkeypatch.delenv(cli.OUTPUT_DIR_ENV, raising=False)
    code, out, _ = run(["attack-walk", "--n", "8", "--step-budget", "0", "--r", "1"], capsys)
    doc = json.loads(out)
    assert doc["summary"]["successes"] < doc["summary"]["trials"]
    assert code == 2


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "kacbench.cli", "bounds", "--t-max", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0].startswith("t,setting,kind")
