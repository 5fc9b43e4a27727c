from io import StringIO
import os
import json

import numpy as np
import pandas as pd
import pytest

from robustspc.run import phase1_script, monitor_script, simulate_script, qq_script, \
    phase1, monitor, simulate, qq, monitor_exit_code
from robustspc.conventions import ExitCode, arl_fields, seed_default
from robustspc.yaml import yaml_load_file, yaml_dump_file
from robustspc.input import ConfigError
from robustspc.simulate import ScenarioError

from .common import stdout_redirector, normal_subgroups, write_dataset


def exit_code(script, args):
    with pytest.raises(SystemExit) as excinfo:
        script(args)
    return excinfo.value.code


def read_bytes(path):
    with open(path, "rb") as f:
        return f.read()


@pytest.fixture
def datasets(tmpdir, rng):
    univariate = normal_subgroups(rng, 40, 10)
    phase2 = np.stack([np.zeros((10, 1)), np.full((10, 1), 10.)])
    return {"phase1": write_dataset(os.path.join(tmpdir, "phase1.csv"), univariate),
            "in_control": write_dataset(os.path.join(tmpdir, "in_control.csv"),
                                        phase2[:1]),
            "shifted": write_dataset(os.path.join(tmpdir, "shifted.csv"), phase2),
            "mv": write_dataset(os.path.join(tmpdir, "mv.csv"),
                                normal_subgroups(rng, 30, 10, 2))}


def test_phase1_and_monitor_scripts(tmpdir, datasets):
    prefix = os.path.join(tmpdir, "run")
    args = [datasets["phase1"], "--chart", "trimmed_shewhart", "--alpha", "0.1",
            "--tail-prob", "0.01", "-o", prefix, "-s", "7"]
    assert exit_code(phase1_script, args) == ExitCode.ok
    artifact = prefix + ".chart.yaml"
    state = yaml_load_file(artifact)
    assert state["family"] == "trimmed_shewhart"
    assert state["options"]["tail_prob"] == 0.01
    assert state["provenance"]["seed"] == 7
    # refuses to overwrite, unless forced
    assert exit_code(phase1_script, args) == ExitCode.usage
    assert exit_code(phase1_script, args + ["-f"]) == ExitCode.ok
    stream = StringIO()
    with stdout_redirector(stream):
        assert exit_code(monitor_script, [artifact, datasets["in_control"]]) == \
               ExitCode.ok
    assert len(stream.getvalue().splitlines()) == 2
    stream = StringIO()
    with stdout_redirector(stream):
        assert exit_code(monitor_script, [artifact, datasets["shifted"]]) == \
               ExitCode.signal
    records = [json.loads(line) for line in stream.getvalue().splitlines()]
    assert [(r["index"], r["chart"]) for r in records] == [
        (1, "xbar_t"), (1, "s_t"), (2, "xbar_t"), (2, "s_t")]
    assert not records[2]["in_control"]
    assert exit_code(monitor_script, [artifact, datasets["shifted"], "-o", prefix]) == \
           ExitCode.signal
    with open(prefix + ".monitor.jsonl", encoding="utf-8") as f:
        assert len(f.read().splitlines()) == 4


def test_script_errors(tmpdir, datasets):
    prefix = os.path.join(tmpdir, "err")
    assert exit_code(phase1_script, [datasets["phase1"], "--chart", "trimed_shewhart"]) \
           == ExitCode.usage
    assert exit_code(phase1_script, [datasets["phase1"], "--chart", "trimmed_shewhart",
                                     "--alpha", "0.6"]) == ExitCode.usage
    assert exit_code(phase1_script, [os.path.join(tmpdir, "nowhere.csv"),
                                     "--chart", "shewhart"]) == ExitCode.usage
    assert exit_code(phase1_script, [datasets["phase1"]]) == ExitCode.usage
    # univariate chart on bivariate data
    assert exit_code(phase1_script, [datasets["mv"], "--chart", "shewhart"]) == \
           ExitCode.usage
    # every point trimmed: the fit fails
    assert exit_code(phase1_script, [datasets["mv"], "--chart", "tau2", "--cutvalue",
                                     "1", "--B", "50"]) == ExitCode.fault
    assert exit_code(monitor_script, [os.path.join(tmpdir, "nowhere.yaml"),
                                      datasets["shifted"]]) == ExitCode.usage
    assert exit_code(phase1_script, [datasets["phase1"], "--chart", "shewhart",
                                     "-o", prefix]) == ExitCode.ok
    assert exit_code(monitor_script, [prefix + ".chart.yaml", datasets["mv"]]) == \
           ExitCode.usage
    # argparse errors
    assert exit_code(simulate_script, []) == 2
    assert exit_code(phase1_script, [datasets["phase1"], "--B", "many"]) == 2


def test_reproducible_outputs(tmpdir, datasets):
    prefix = os.path.join(tmpdir, "tau")
    args = [datasets["mv"], "--chart", "tau2", "--B", "100", "-s", "3", "-o", prefix]
    assert exit_code(phase1_script, args) == ExitCode.ok
    first = read_bytes(prefix + ".chart.yaml")
    assert exit_code(phase1_script, args + ["-f"]) == ExitCode.ok
    assert read_bytes(prefix + ".chart.yaml") == first


simulate_yaml = """
seed: 11
simulate:
  scenarios:
    small:
      size: 2
      phase1: 2
      replications: 50
      phase2_cap: 500
  charts:
    rare:
      _fixed_rate:
        q: 0.05
    often:
      _fixed_rate:
        q: 0.5
qq:
  subgroups: 300
  size: 10
"""


def test_simulate_script(tmpdir):
    config = os.path.join(tmpdir, "sim.yaml")
    with open(config, "w", encoding="utf-8") as f:
        f.write(simulate_yaml)
    prefix = os.path.join(tmpdir, "sim")
    assert exit_code(simulate_script, ["-c", config, "-o", prefix]) == ExitCode.ok
    table = pd.read_csv(prefix + ".arl.csv")
    assert list(table.columns) == list(arl_fields)
    assert list(table.chart) == ["rare", "often"]
    assert table.arl.iloc[0] > table.arl.iloc[1]
    meta = yaml_load_file(prefix + ".meta.yaml")
    assert meta["provenance"]["seed"] == 11
    assert meta["column_order"] == list(arl_fields)
    assert meta["scenarios"]["small"]["replications"] == 50
    assert "qq" in meta
    assert os.path.exists(prefix + ".qq_normal.csv")
    first = read_bytes(prefix + ".arl.csv")
    assert exit_code(simulate_script, ["-c", config, "-o", prefix]) == ExitCode.usage
    assert exit_code(simulate_script, ["-c", config, "-o", prefix, "-f"]) == ExitCode.ok
    assert read_bytes(prefix + ".arl.csv") == first
    with open(config, "a", encoding="utf-8") as f:
        f.write("alarm: email\n")
    assert exit_code(simulate_script, ["-c", config]) == ExitCode.usage


def test_qq_script(tmpdir):
    prefix = os.path.join(tmpdir, "qq")
    assert exit_code(qq_script, ["-o", prefix, "-s", "2"]) == ExitCode.ok
    normal = pd.read_csv(prefix + ".qq_normal.csv")
    assert list(normal.columns) == ["theoretical", "sample"]
    assert len(normal) == 5000
    meta = yaml_load_file(prefix + ".meta.yaml")
    assert meta["provenance"]["seed"] == 2
    assert meta["gamma_fit"]["shape"] > 0


def test_python_interface(rng):
    phase1_data = normal_subgroups(rng, 40, 10)
    info, chart = phase1({"chart": {"trimmed_ewma": {"lam": 0.2}}}, phase1_data, seed=1)
    assert info["chart"]["trimmed_ewma"]["alpha"] == 0.1
    stream = StringIO()
    _, records, signals = monitor(chart, np.full((3, 10, 1), 10.), stream=stream)
    assert signals == 3 and len(records) == 3
    assert len(stream.getvalue().splitlines()) == 3
    _, table = simulate({"chart": {"_fixed_rate": {"q": 0.5}},
                         "simulate": {"scenario": {"size": 2, "phase1": 2,
                                                   "replications": 5}}}, seed=1)
    assert list(table.chart) == ["_fixed_rate"]
    _, diagnostics = qq({"qq": {"subgroups": 200}}, seed=1)
    assert diagnostics.normal_points.shape == (200, 2)
    with pytest.raises(ConfigError):
        phase1({}, phase1_data)
    with pytest.raises(ScenarioError):
        simulate({"simulate": {"scenario": {"size": 1}}, "chart": "ewma"})


def test_monitor_fault_exit_code(tmpdir, datasets):
    prefix = os.path.join(tmpdir, "trimmed")
    assert exit_code(phase1_script, [datasets["mv"], "--chart", "tau2", "--B", "100",
                                     "-o", prefix]) == ExitCode.ok
    artifact = prefix + ".chart.yaml"
    state = yaml_load_file(artifact)
    # every Phase-II point is trimmed
    state["estimates"]["cutvalue"] = 1.
    yaml_dump_file(artifact, state)
    stream = StringIO()
    with stdout_redirector(stream):
        assert exit_code(monitor_script, [artifact, datasets["mv"]]) == ExitCode.fault
    records = [json.loads(line) for line in stream.getvalue().splitlines()]
    assert len(records) == 30
    assert all(r["fault"] and not r["in_control"] for r in records)


def test_monitor_exit_code():
    records = pd.DataFrame({"fault": [None, None], "in_control": [True, False]})
    assert monitor_exit_code(records, 0) == ExitCode.ok
    assert monitor_exit_code(records, 1) == ExitCode.signal
    records.loc[0, "fault"] = "all points trimmed"
    assert monitor_exit_code(records, 1) == ExitCode.fault


def test_default_seed_reproducible(tmpdir, datasets):
    config = os.path.join(tmpdir, "unseeded.yaml")
    with open(config, "w", encoding="utf-8") as f:
        f.write(simulate_yaml.replace("seed: 11\n", ""))
    outputs = []
    for run in ("first", "second"):
        prefix = os.path.join(tmpdir, run)
        assert exit_code(simulate_script, ["-c", config, "-o", prefix]) == ExitCode.ok
        assert exit_code(qq_script, ["-o", prefix + "_qq"]) == ExitCode.ok
        assert exit_code(phase1_script, [datasets["mv"], "--chart", "tau2", "--B", "100",
                                         "-o", prefix]) == ExitCode.ok
        outputs.append([read_bytes(prefix + suffix) for suffix in
                        (".arl.csv", ".meta.yaml", "_qq.qq_normal.csv",
                         "_qq.qq_gamma.csv", ".chart.yaml")])
    assert outputs[0] == outputs[1]
    assert yaml_load_file(os.path.join(tmpdir, "first.chart.yaml"))["provenance"][
               "seed"] == seed_default
