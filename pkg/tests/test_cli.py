import numpy as np
import pytest

from kumite.harness.cli import main, parse_agent


def test_parse_agent_specs():
    assert parse_agent("hold").id == "hold"
    assert parse_agent("random:5").id == "random-5"
    with pytest.raises(Exception):
        parse_agent("bogus:1")


def test_cli_schedule_sim(tmp_path, capsys):
    out = tmp_path / "sched.tsv"
    assert main(["selfplay-schedule-sim", "--games", "2000", "--seed", "1",
                 "--out", str(out)]) == 0
    text = out.read_text()
    assert text.startswith("# kumite-table v1 schedule-sim")
    assert "swap_rate" in text


def test_cli_bench(tmp_path):
    out = tmp_path / "bench.tsv"
    jout = tmp_path / "bench.json"
    assert main(["bench", "--frames-per-turn", "10", "--instances", "1",
                 "--duration", "0.5", "--seed", "0",
                 "--out", str(out), "--json-out", str(jout)]) == 0
    assert out.read_text().startswith("# kumite-table v1 benchmark")
    assert jout.exists()


def test_cli_crossplay(tmp_path):
    out = tmp_path / "matrix.tsv"
    rout = tmp_path / "report.tsv"
    assert main(["crossplay", "--agents", "hold,random:1", "--episodes", "1",
                 "--seed", "0", "--out", str(out), "--report-out", str(rout)]) == 0
    assert "crossplay" in out.read_text()
    assert "antisymmetry" in rout.read_text()


def test_cli_train_baseline(tmp_path, capsys):
    pol = tmp_path / "policy.npz"
    curve = tmp_path / "curve.tsv"
    assert main(["train-baseline", "--budget", "32", "--seed", "0",
                 "--policy-out", str(pol), "--curve-out", str(curve)]) == 0
    assert pol.exists()
    assert curve.read_text().startswith("# kumite-table v1 training-curve")
    # the saved policy is loadable as an agent
    assert parse_agent(f"baseline:{pol}").make_policy(0).act(None).shape == (22,)


def test_cli_play(tmp_path, capsys):
    assert main(["play", "--p1", "hold", "--p2", "random:2", "--seed", "3"]) == 0
    out = capsys.readouterr().out
    assert "winner:" in out
