import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest
from click.testing import CliRunner

from disperse_uc.cli import main, parse_value, set_key, thread_cap
from disperse_uc.errors import ConfigError
from disperse_uc.experiments import parse_config

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

TREVES = {"experiment": "treves", "m": 2, "grid": [[12, 1024]],
          "parameters": {"weight": [-0.2, 0.3, 0.5], "P": [1, 0, -6, 0, 1]}}


@pytest.fixture
def cfg(tmp_path):
    def write(doc, name="c.json"):
        p = tmp_path / name
        p.write_text(json.dumps(doc), encoding="utf-8")
        return str(p)
    return write


def invoke(*args, env=None):
    return CliRunner().invoke(main, list(args), env=env)


def test_run_pass(cfg):
    r = invoke("run", "--config", cfg(TREVES))
    assert r.exit_code == 0, r.output
    rep = json.loads(r.output)
    assert rep["pass"] is True
    assert rep["primary"] == "defect"
    assert set(rep) >= {"config", "results", "tolerance", "wall_time", "artifact_version"}


def test_run_fail_exit_1(cfg):
    # 32 points cannot resolve fourth derivatives of the weighted Gaussian
    r = invoke("run", "--config", cfg(TREVES), "--set", "grid=[[12, 32]]")
    assert r.exit_code == 1
    assert json.loads(r.output)["pass"] is False


def test_missing_key_exit_2(cfg):
    doc = {k: v for k, v in TREVES.items() if k != "m"}
    r = invoke("run", "--config", cfg(doc))
    assert r.exit_code == 2
    assert "'m'" in r.output


@pytest.mark.parametrize("doc,word", [
    ({**TREVES, "experiment": "nope"}, "nope"),
    ({**TREVES, "grid": [[12, 64], [3, 64]]}, "grid"),
    ({**TREVES, "colour": 1}, "colour"),
])
def test_config_errors_named(cfg, doc, word):
    r = invoke("run", "--config", cfg(doc))
    assert r.exit_code == 2
    assert word in r.output


def test_unreadable_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert invoke("run", "--config", str(bad)).exit_code == 2
    assert invoke("run", "--config", str(tmp_path / "absent.json")).exit_code == 2


def test_domain_error_exit_2(cfg):
    # the field reaches the boundary of a short interval
    r = invoke("run", "--config", cfg(TREVES), "--set", "grid=[[3, 256]]")
    assert r.exit_code == 2


def test_numerical_error_exit_3():
    r = invoke("run", "--config", str(CONFIGS / "kernel-decay.json"), "--set", "grid=[[40, 64]]")
    assert r.exit_code == 3
    assert "error" in r.output


def test_json_sorted_and_round_trip(cfg, tmp_path):
    out = tmp_path / "out.json"
    r = invoke("run", "--config", cfg(TREVES), "--output", str(out))
    assert r.exit_code == 0
    text = out.read_text(encoding="utf-8")
    rep = json.loads(text)
    assert text == json.dumps(rep, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    cfg2 = parse_config(rep["config"])
    assert cfg2.to_dict() == rep["config"]


def test_set_override(cfg):
    r = invoke("run", "--config", cfg(TREVES), "--set", "parameters.P=[1]")
    assert r.exit_code == 0
    rep = json.loads(r.output)
    assert rep["config"]["parameters"]["P"] == [1]
    assert rep["results"]["defect"] <= 1e-14


def test_set_requires_equals(cfg):
    assert invoke("run", "--config", cfg(TREVES), "--set", "m").exit_code == 2


def test_run_csv(cfg, tmp_path):
    path = tmp_path / "s.csv"
    r = invoke("run", "--config", str(CONFIGS / "subordination.json"), "--csv", str(path))
    assert r.exit_code == 0
    rows = list(csv.DictReader(path.open(encoding="utf-8")))
    assert len(rows) == 9 and set(rows[0]) == {"x", "y"}


def test_sweep(cfg, tmp_path):
    out, table = tmp_path / "sw.json", tmp_path / "sw.csv"
    r = invoke("sweep", "--config", cfg(TREVES), "--axis", "m", "--values", "1,2",
               "--set", "parameters.P=[0,0,1]", "--output", str(out), "--csv", str(table),
               env={"DISPERSE_UC_THREADS": "1"})
    assert r.exit_code == 0, r.output
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert [row["value"] for row in doc["rows"]] == [1, 2]
    assert doc["summary"]["count"] == 2
    rows = list(csv.DictReader(table.open(encoding="utf-8")))
    assert [row["status"] for row in rows] == ["pass", "pass", "summary"]
    assert list(rows[0]) == ["axis", "value", "status", "pass", "primary", "primary_value", "error"]


def test_single_value_sweep_matches_run(cfg):
    path = cfg(TREVES)
    run = json.loads(invoke("run", "--config", path).output)
    sw = json.loads(invoke("sweep", "--config", path, "--axis", "m", "--values", "2").output)
    assert sw["rows"][0]["report"]["results"] == run["results"]


def test_sweep_mixed_status_exit(cfg):
    r = invoke("sweep", "--config", cfg(TREVES), "--axis", "grid", "--values", "x",
               env={"DISPERSE_UC_THREADS": "1"})
    assert r.exit_code == 2
    r = invoke("sweep", "--config", cfg(TREVES), "--axis", "parameters.P", "--values", "1,2",
               env={"DISPERSE_UC_THREADS": "1"})
    assert r.exit_code == 2
    # one good row and one bad m: the config error wins over the pass
    r = invoke("sweep", "--config", cfg(TREVES), "--axis", "m", "--values", "2,0",
               env={"DISPERSE_UC_THREADS": "1"})
    assert r.exit_code == 2
    assert [row["status"] for row in json.loads(r.output)["rows"]] == ["pass", "config_error"]
    # a fail row alongside a pass row
    r = invoke("sweep", "--config", cfg(TREVES), "--axis", "tolerance.defect", "--values", "1,1e-30", "--set", "grid=[[12, 64]]",
               env={"DISPERSE_UC_THREADS": "1"})
    assert r.exit_code == 1
    assert [row["status"] for row in json.loads(r.output)["rows"]] == ["pass", "fail"]


def test_threads_env(monkeypatch):
    monkeypatch.setenv("DISPERSE_UC_THREADS", "3")
    assert thread_cap() == 3
    for bad in ("zero", "0", "-2"):
        monkeypatch.setenv("DISPERSE_UC_THREADS", bad)
        with pytest.raises(ConfigError):
            thread_cap()


def test_threads_env_invalid_exit(cfg):
    r = invoke("sweep", "--config", cfg(TREVES), "--axis", "m", "--values", "1,2",
               env={"DISPERSE_UC_THREADS": "lots"})
    assert r.exit_code == 2


def test_parallel_sweep_matches_serial(cfg):
    path = cfg(TREVES)
    args = ("sweep", "--config", path, "--axis", "m", "--values", "1,2,3")
    a = json.loads(invoke(*args, env={"DISPERSE_UC_THREADS": "1"}).output)
    b = json.loads(invoke(*args, env={"DISPERSE_UC_THREADS": "3"}).output)
    assert [r["report"]["results"] for r in a["rows"]] == [r["report"]["results"] for r in b["rows"]]


def test_deterministic_results():
    path = str(CONFIGS / "multiplier-uniformity.json")
    over = ("--set", "grid=[[10, 128], [10, 128]]")
    a = json.loads(invoke("run", "--config", path, *over).output)
    b = json.loads(invoke("run", "--config", path, *over).output)
    assert a["results"] == b["results"]


def test_parse_value_and_set_key():
    assert parse_value("1e-3") == 1e-3
    assert parse_value("[1, 2]") == [1, 2]
    assert parse_value("gaussian") == "gaussian"
    d = {"parameters": {"b": 1}}
    set_key(d, "parameters.b", 2)
    set_key(d, "seed", 4)
    assert d == {"parameters": {"b": 2}, "seed": 4}
    with pytest.raises(ConfigError):
        set_key(d, "seed.x", 1)


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "disperse_uc.cli", "run", "--config",
                        str(CONFIGS / "subordination.json")], capture_output=True)
    assert r.returncode == 0
    assert json.loads(r.stdout.decode("utf-8"))["pass"] is True
