"""Experiment configs, CSV output, reproducibility, and the CLI."""

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from dcso.bench import SeparableModel
from dcso.harness import (
    CSV_HEADER,
    ConfigError,
    ExperimentConfig,
    landscape_scan,
    run_experiment,
)
from dcso.cli import main
from dcso.rng import seed_stream


def base_config(**overrides):
    raw = {
        "algorithm": "AS",
        "model": "SEPARABLE",
        "d": 1,
        "N": 10,
        "epsilon": 0.3,
        "delta": 0.05,
        "replications": 3,
        "master_seed": 123,
    }
    raw.update(overrides)
    return raw


# --- config validation ------------------------------------------------------


def test_config_round_trip_from_dict():
    cfg = ExperimentConfig.from_dict(base_config(N=[10, 20]))
    assert cfg.N_list == [10, 20]
    assert cfg.algorithm == "AS"
    assert cfg.so_relax_factor == 1.0


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown config keys"):
        ExperimentConfig.from_dict(base_config(typo_key=1))


def test_config_rejects_missing_keys():
    raw = base_config()
    del raw["epsilon"]
    with pytest.raises(ConfigError, match="missing config keys"):
        ExperimentConfig.from_dict(raw)


@pytest.mark.parametrize(
    "overrides, match",
    [
        ({"algorithm": "NOPE"}, "unknown algorithm"),
        ({"model": "NOPE"}, "unknown model"),
        ({"algorithm": "EAS", "d": 2}, "requires d=1"),
        ({"model": "QUEUE", "d": 2, "algorithm": "VAIDYA", "lipschitz_L": 1.0}, "one-dimensional"),
        ({"algorithm": "AS_IZ"}, "requires iz_c"),
        ({"algorithm": "VAIDYA", "model": "QUEUE"}, "requires lipschitz_L"),
        ({"engine_kind": "NOPE"}, "unknown engine_kind"),
        ({"replications": 0}, "must be positive"),
        ({"delta": 1.5}, "delta"),
        ({"epsilon": -1.0}, "epsilon"),
    ],
)
def test_config_rejects_inconsistencies(overrides, match):
    with pytest.raises(ConfigError, match=match):
        ExperimentConfig.from_dict(base_config(**overrides))


def test_config_from_json_rejects_bad_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        ExperimentConfig.from_json(str(p))
    p2 = tmp_path / "list.json"
    p2.write_text("[1, 2]")
    with pytest.raises(ConfigError, match="JSON object"):
        ExperimentConfig.from_json(str(p2))


# --- experiment runs --------------------------------------------------------


def test_run_experiment_csv_shape_and_success(tmp_path):
    out = tmp_path / "rows.csv"
    cfg = ExperimentConfig.from_dict(base_config(output_path=str(out)))
    curve, records = run_experiment(cfg)
    assert len(records) == 3
    assert curve.coverage(10) == 1.0
    assert curve.mean_cost(10) > 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == CSV_HEADER
    assert len(rows) == 4
    for row in rows[1:]:
        assert row[0] == "AS"
        assert int(row[8]) > 0  # total_samples
        assert row[12] in {"0", "1"}


def test_run_experiment_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        cfg = ExperimentConfig.from_dict(base_config(output_path=str(out)))
        run_experiment(cfg)
    assert a.read_bytes() == b.read_bytes()


def test_run_experiment_thread_pool_matches_serial(tmp_path, monkeypatch):
    a, b = tmp_path / "serial.csv", tmp_path / "pool.csv"
    cfg_a = ExperimentConfig.from_dict(base_config(output_path=str(a), N=[8, 12]))
    run_experiment(cfg_a)
    monkeypatch.setenv("CSO_THREADS", "4")
    cfg_b = ExperimentConfig.from_dict(base_config(output_path=str(b), N=[8, 12]))
    run_experiment(cfg_b)
    assert a.read_bytes() == b.read_bytes()


def test_run_experiment_queue_rows_have_blank_gap(tmp_path):
    out = tmp_path / "q.csv"
    cfg = ExperimentConfig.from_dict(
        base_config(model="QUEUE", algorithm="EAS", N=4, epsilon=8.0, delta=0.3,
                    queue_sigma2=0.5, replications=1, output_path=str(out))
    )
    _, records = run_experiment(cfg)
    assert records[0].gap is None and records[0].success is None
    with open(out, newline="") as fh:
        row = list(csv.reader(fh))[1]
    assert row[11] == "" and row[12] == ""


def test_wall_ms_zero_unless_timing_enabled():
    cfg = ExperimentConfig.from_dict(base_config(replications=1))
    _, records = run_experiment(cfg)
    assert records[0].wall_ms == 0
    cfg_t = ExperimentConfig.from_dict(base_config(replications=1, timing=True))
    _, records_t = run_experiment(cfg_t)
    assert records_t[0].wall_ms >= 0


# --- landscape --------------------------------------------------------------


def test_landscape_scan_zero_noise_model(tmp_path):
    model = SeparableModel(d=1, N=6, c=np.array([1.0]), x_star=np.array([3]), noise_sigma=0.0)
    rows = landscape_scan(model.oracle(), range(1, 7), 5, seed_stream(1, "ls"),
                          output_path=str(tmp_path / "l.csv"))
    assert len(rows) == 6
    for x, mean, hw in rows:
        assert mean == pytest.approx(model.true_value([x]))
        assert hw <= 1e-12
    with open(tmp_path / "l.csv", newline="") as fh:
        got = list(csv.reader(fh))
    assert got[0] == ["x", "mean", "halfwidth"]
    assert len(got) == 7


def test_landscape_scan_halfwidth_shrinks_with_replications():
    model = SeparableModel(d=1, N=4, c=np.array([1.0]), x_star=np.array([2]), noise_sigma=1.0)
    small = landscape_scan(model.oracle(), [2], 50, seed_stream(2, "lw"))
    big = landscape_scan(model.oracle(), [2], 5000, seed_stream(2, "lw"))
    assert big[0][2] < small[0][2]


# --- CLI --------------------------------------------------------------------


def test_cli_run_exit_codes(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(base_config(replications=1)))
    assert main(["run", "--config", str(cfg_path)]) == 0
    out = capsys.readouterr().out
    assert "N=10" in out and "coverage=1.000" in out

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(base_config(algorithm="NOPE")))
    assert main(["run", "--config", str(bad)]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 2


def test_cli_landscape(tmp_path, capsys):
    cfg = {"model": "SEPARABLE", "N": 5, "replications": 3, "master_seed": 4,
           "points": [1, 2, 3], "output_path": str(tmp_path / "land.csv")}
    p = tmp_path / "l.json"
    p.write_text(json.dumps(cfg))
    assert main(["landscape", "--config", str(p)]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 3
    assert (tmp_path / "land.csv").exists()

    bad = tmp_path / "lb.json"
    bad.write_text(json.dumps({"model": "SEPARABLE", "N": 5, "bogus": 1}))
    assert main(["landscape", "--config", str(bad)]) == 2


def test_cli_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    assert "all checks passed" in capsys.readouterr().out


def test_cli_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "dcso.cli", "--version"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "dcso" in proc.stdout
