import csv
import json
import os
import subprocess
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import pytest

from talagrand_lab import cli
from talagrand_lab.report import InequalityReport

REPO = Path(__file__).resolve().parents[1]
SCHEMA = json.loads(resources.files("talagrand_lab").joinpath("data", "run_report.schema.json").read_text())

FAST = """
# two quick scenarios
[scenario.gap]
suite = symmetric-group-gap
n = 3

[scenario.ident]
suite = generator-identity
N = 2,4
functions = 3
"""

FAILING = """
[scenario.tiny-C]
suite = theorem1-product-cube
N = 4
p = 0.5
functions = 12
C = 0.01
"""


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr()


REQUIRED_IDS = {
    "theorem1-product-cube",
    "kkl-cube",
    "talagrand-biased-cube",
    "logsob-two-point",
    "symmetric-group-gap",
    "gaussian-l2-talagrand",
    "gaussian-l1-talagrand",
    "geometric-influence-gaussian",
    "isoperimetric-halfspace",
    "sphere-l2-talagrand",
    "sphere-l1-talagrand",
    "brascamp-lieb-gaussian",
}


def test_list(capsys):
    code, out = run(["list"], capsys)
    assert code == 0
    ids = [line.split()[0] for line in out.out.splitlines()]
    assert len(ids) >= 12
    assert REQUIRED_IDS <= set(ids)


# ---------------------------------------------------------------- config parsing


def test_parse_config_defaults_and_suite():
    scs = cli.parse_config(FAST)
    assert [s.id for s in scs] == ["gap", "ident"]
    assert scs[0].suite == "symmetric-group-gap" and scs[0].params["n"] == (3,)
    assert scs[1].params["p"] == 0.7  # default kept
    # suite defaults to the section id
    assert cli.parse_config("[scenario.kkl-cube]\n")[0].suite == "kkl-cube"


def test_parse_config_collects_line_diagnostics():
    text = "\n".join([
        "[scenario.a]",
        "suite = kkl-cube",
        "bogus = 1",
        "N = three",
        "[scenario.b]",
        "suite = no-such-suite",
        "orphan line",
        "[scenario.a]",
    ])
    with pytest.raises(cli.ConfigError) as exc:
        cli.parse_config(text, "x.cfg")
    msgs = exc.value.messages
    assert any(m.startswith("x.cfg:3:") and "bogus" in m for m in msgs)
    assert any(m.startswith("x.cfg:4:") for m in msgs)
    assert any(m.startswith("x.cfg:5:") and "no-such-suite" in m for m in msgs)
    assert any(m.startswith("x.cfg:7:") for m in msgs)
    assert any(m.startswith("x.cfg:8:") and "duplicate" in m for m in msgs)


def test_parse_config_empty_and_key_outside():
    with pytest.raises(cli.ConfigError):
        cli.parse_config("# nothing\n")
    with pytest.raises(cli.ConfigError, match=":1:"):
        cli.parse_config("N = 3\n[scenario.kkl-cube]\n")


def test_scenario_seed_is_stable_and_distinct():
    a = cli.scenario_seed(0, "gap")
    assert a == cli.scenario_seed(0, "gap")
    assert a != cli.scenario_seed(1, "gap") != cli.scenario_seed(0, "ident")
    assert 0 <= a < 2 ** 64


# ---------------------------------------------------------------- exit codes and reports


def test_run_pass_writes_valid_reports(tmp_path, capsys):
    out = tmp_path / "out"
    code, res = run(["run", write(tmp_path, FAST), "--out", str(out)], capsys)
    assert code == 0
    assert "PASS  gap" in res.out
    for sid in ("gap", "ident"):
        rec = json.loads((out / f"{sid}.json").read_text())
        jsonschema.validate(rec, SCHEMA)
        assert rec["status"] == "pass"
        with open(out / f"{sid}.csv") as fh:
            assert next(csv.reader(fh)) == ["id", "model", "lhs", "rhs", "constant", "ratio", "verdict"]
        with open(out / f"{sid}.estimates.csv") as fh:
            assert next(csv.reader(fh)) == ["quantity", "value", "std_error", "method"]
    with open(out / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert tuple(rows[0]) == cli.SUMMARY_COLUMNS
    assert [r["scenario"] for r in rows] == ["gap", "ident"]


def test_run_fail_exit_1(tmp_path, capsys):
    out = tmp_path / "out"
    code, res = run(["run", write(tmp_path, FAILING), "--out", str(out)], capsys)
    assert code == 1
    assert "FAIL  tiny-C" in res.out
    assert res.out.count("      fail ") <= cli.MAX_PRINTED_FAILURES
    rec = json.loads((out / "tiny-C.json").read_text())
    jsonschema.validate(rec, SCHEMA)
    assert rec["summary"]["failures"] > 0


def test_bad_config_exit_2(tmp_path, capsys):
    cfg = write(tmp_path, "[scenario.kkl-cube]\nN = 0.5\n")
    code, res = run(["run", cfg, "--out", str(tmp_path / "o")], capsys)
    assert code == 2
    assert f"{cfg}:2:" in res.err
    assert not (tmp_path / "o").exists()
    code, res = run(["run", str(tmp_path / "missing.cfg")], capsys)
    assert code == 2


def test_model_error_exit_2(tmp_path, capsys):
    # a degenerate set is a model error, captured as status "error"
    cfg = write(tmp_path, "[scenario.deg]\nsuite = influence-set\nset = predicate empty\nN = 2\n")
    out = tmp_path / "o"
    code, res = run(["run", cfg, "--out", str(out)], capsys)
    assert code == 2
    rec = json.loads((out / "deg.json").read_text())
    jsonschema.validate(rec, SCHEMA)
    assert rec["status"] == "error" and rec["error"]


def test_exit_code_precedence():
    ok = cli.RunReport("a", "s", 0, {}, [InequalityReport("x", "m", 1.0, 2.0, 1.0)])
    bad = cli.RunReport("b", "s", 0, {}, [InequalityReport("x", "m", 3.0, 2.0, 1.0)])
    err = cli.RunReport("c", "s", 0, {}, error="boom")
    assert cli.exit_code([ok]) == 0
    assert cli.exit_code([ok, bad]) == 1
    assert cli.exit_code([bad, err]) == 2


def test_infinite_ratio_serialises(tmp_path):
    rr = cli.RunReport("z", "s", 0, {}, [InequalityReport("x", "m", 1.0, 0.0, 1.0)])
    rec = rr.to_json()
    assert rec["summary"]["max_ratio"] is None
    jsonschema.validate(json.loads(json.dumps(rec)), SCHEMA)


def _strip_times(d):
    d = json.loads(d)
    d.pop("wall_time")
    return d


def test_deterministic_and_jobs_keep_order(tmp_path, capsys):
    cfg = write(tmp_path, FAST)
    run(["run", cfg, "--out", str(tmp_path / "a"), "--seed", "5"], capsys)
    run(["run", cfg, "--out", str(tmp_path / "b"), "--seed", "5", "--jobs", "2"], capsys)
    for sid in ("gap", "ident"):
        a = _strip_times((tmp_path / "a" / f"{sid}.json").read_text())
        b = _strip_times((tmp_path / "b" / f"{sid}.json").read_text())
        assert a == b
        assert (tmp_path / "a" / f"{sid}.csv").read_text() == (tmp_path / "b" / f"{sid}.csv").read_text()
    with open(tmp_path / "b" / "summary.csv") as fh:
        assert [r["scenario"] for r in csv.DictReader(fh)] == ["gap", "ident"]


def test_seed_changes_randomised_scenarios(tmp_path, capsys):
    cfg = write(tmp_path, FAST)
    run(["run", cfg, "--out", str(tmp_path / "a"), "--seed", "1"], capsys)
    run(["run", cfg, "--out", str(tmp_path / "b"), "--seed", "2"], capsys)
    a = json.loads((tmp_path / "a" / "ident.json").read_text())
    b = json.loads((tmp_path / "b" / "ident.json").read_text())
    assert a["seed"] != b["seed"]
    assert a["reports"] != b["reports"]


def test_bad_seed_and_jobs(tmp_path, capsys):
    cfg = write(tmp_path, FAST)
    with pytest.raises(SystemExit):
        cli.main(["run", cfg, "--seed", "-1"])
    code, _ = run(["run", cfg, "--jobs", "0"], capsys)
    assert code == 2


def test_env_var_sets_output_dir(tmp_path):
    cfg = write(tmp_path, FAST)
    out = tmp_path / "from-env"
    env = dict(os.environ, TALAGRAND_LAB_OUT=str(out))
    proc = subprocess.run([sys.executable, "-m", "talagrand_lab.cli", "run", cfg], env=env, cwd=tmp_path, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (out / "summary.csv").exists()


def test_default_output_dir(tmp_path):
    cfg = write(tmp_path, FAST)
    env = {k: v for k, v in os.environ.items() if k != "TALAGRAND_LAB_OUT"}
    proc = subprocess.run([sys.executable, "-m", "talagrand_lab.cli", "run", cfg], env=env, cwd=tmp_path, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / cli.DEFAULT_OUT / "gap.json").exists()


def test_calibrate_command(capsys):
    code, res = run(["calibrate", "theorem8", "--corpus-seed", "404"], capsys)
    assert code == 0
    assert json.loads(res.out)["value"] == 0.561
    assert "reproduced" in res.err and "NOT" not in res.err
    code, res = run(["calibrate", "nope", "--corpus-seed", "1"], capsys)
    assert code == 2


@pytest.mark.parametrize("name,expected", [("smoke.cfg", 0), ("adversarial.cfg", 1)])
def test_shipped_configs(name, expected, tmp_path, capsys):
    code, _ = run(["run", str(REPO / "configs" / name), "--out", str(tmp_path)], capsys)
    assert code == expected
