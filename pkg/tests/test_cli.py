"""End-to-end checks of the command-line entry points."""

from __future__ import annotations

from mirrorlearn import cli
from mirrorlearn.experiment import Condition, ExperimentConfig
from mirrorlearn.mirror_env import EnvConfig


def write_config(tmp_path, **overrides):
    cfg = ExperimentConfig(
        condition=Condition.SIM_CONTROL_FEEDBACK,
        seed=3,
        total_steps=800,
        env=EnvConfig(num_periods=1),
        out_dir=str(tmp_path / "runs"),
        **overrides,
    )
    path = tmp_path / "config.json"
    cfg.save(path)
    return path


def test_run_writes_logs_and_csv(tmp_path, capsys):
    config = write_config(tmp_path)
    out = tmp_path / "runs"
    csv = tmp_path / "summary.csv"
    rc = cli.main([
        "run", "--condition", "sim-cf", "--seeds", "2",
        "--config", str(config), "--out", str(out), "--csv", str(csv),
    ])
    assert rc == 0
    assert sorted(p.name for p in out.glob("*.jsonl")) == [
        "sim-cf_seed00003.jsonl", "sim-cf_seed00004.jsonl",
    ]
    assert (out / "sim-cf_seed00003.config.json").exists()
    assert csv.read_text().startswith("condition,seed,")
    stdout = capsys.readouterr().out
    assert "sim-cf_seed00003: mae_last_5k=" in stdout


def test_run_refuses_human_conditions(tmp_path, capsys):
    rc = cli.main(["run", "--condition", "C+F", "--out", str(tmp_path)])
    assert rc == 2
    assert "serve" in capsys.readouterr().err


def test_summarize_recomputes_from_logs(tmp_path, capsys):
    config = write_config(tmp_path)
    out = tmp_path / "runs"
    cli.main(["run", "--condition", "sim-c", "--config", str(config), "--out", str(out)])
    csv = tmp_path / "from_logs.csv"
    rc = cli.main(["summarize", "--in", str(out), "--csv", str(csv)])
    assert rc == 0
    assert csv.exists()
    stdout = capsys.readouterr().out
    assert "sim(C) (n=1)" in stdout
    assert "median=" in stdout


def test_summarize_empty_directory_fails(tmp_path, capsys):
    rc = cli.main(["summarize", "--in", str(tmp_path), "--csv", str(tmp_path / "x.csv")])
    assert rc == 2


def test_validate_passes(capsys):
    rc = cli.main(["validate", "--seed", "0"])
    out = capsys.readouterr().out
    assert rc == 0
    assert out.count("[PASS]") == 4
    assert "4/4 checks passed" in out
