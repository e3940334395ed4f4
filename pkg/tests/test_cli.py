"""End-to-end command-line runs in temporary directories."""
from __future__ import annotations

import dataclasses
import json

import pytest

from jamroute import (
    MessageSpec,
    QosParams,
    RoadLine,
    SolverOptions,
    SweepSpec,
    TopologyConfig,
    ExperimentConfig,
    load_topology,
    save_config,
)
from jamroute.cli import EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK, main


def small_config(**overrides):
    base = ExperimentConfig(
        topology=TopologyConfig(
            area_width=100.0,
            area_height=100.0,
            road=RoadLine(a=0.0, b=-50.0),
            node_count=6,
            jammer_count=2,
            road_step=20.0,
        ),
        jammer_power_w=0.1,
        qos=QosParams(
            spectral_efficiency=0.5,
            path_loss_exponent=2.0,
            outage_budget=0.1,
            max_power_w=15.0,
        ),
        message=MessageSpec(bits=0.5, spectral_efficiency=0.5),
        seeds=(1,),
        sweep=SweepSpec(axis="outage_budget", values=(0.1, 0.3)),
        solver=SolverOptions(max_hops=4),
    )
    return dataclasses.replace(base, **overrides) if overrides else base


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "config.json"
    save_config(small_config(), path)
    return path


def test_generate(tmp_path, config_path, capsys):
    out = tmp_path / "gen"
    assert main(["generate", "--config", str(config_path), "--out", str(out)]) == EXIT_OK
    assert (out / "topology.json").exists()
    assert (out / "topology.png").exists()
    assert "6 nodes" in capsys.readouterr().out


def test_generate_no_figures_and_seed_override(tmp_path, config_path):
    out = tmp_path / "gen"
    code = main([
        "generate", "--config", str(config_path), "--out", str(out),
        "--seed", "7", "--no-figures",
    ])
    assert code == EXIT_OK
    assert not (out / "topology.png").exists()
    assert load_topology(out / "topology.json").seed == 7


def test_plan(tmp_path, config_path, capsys):
    out = tmp_path / "plan"
    assert main(["plan", "--config", str(config_path), "--out", str(out)]) == EXIT_OK
    captured = capsys.readouterr().out
    assert "vehicle:" in captured and "baseline:" in captured
    assert (out / "topology.json").exists()
    assert (out / "routes.png").exists()


def test_plan_infeasible_exit_code(tmp_path, capsys):
    cfg = small_config(
        qos=dataclasses.replace(small_config().qos, max_power_w=2e-6),
        sweep=None,
    )
    path = tmp_path / "config.json"
    save_config(cfg, path)
    out = tmp_path / "plan"
    code = main(["plan", "--config", str(path), "--out", str(out), "--no-figures"])
    assert code == EXIT_INFEASIBLE
    assert "infeasible" in capsys.readouterr().out


def test_plan_pmax_infinite_flag(tmp_path, capsys):
    cfg = small_config(
        qos=dataclasses.replace(small_config().qos, max_power_w=2e-6),
        sweep=None,
    )
    path = tmp_path / "config.json"
    save_config(cfg, path)
    out = tmp_path / "plan"
    code = main([
        "plan", "--config", str(path), "--out", str(out),
        "--pmax-infinite", "--no-figures",
    ])
    assert code == EXIT_OK
    assert "audit ok" in capsys.readouterr().out


def test_sweep(tmp_path, config_path, capsys):
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(config_path), "--out", str(out)]) == EXIT_OK
    assert (out / "sweep.csv").exists()
    assert (out / "sweep.png").exists()
    assert "4 rows" in capsys.readouterr().out


def test_sweep_no_figures(tmp_path, config_path):
    out = tmp_path / "sweep"
    code = main([
        "sweep", "--config", str(config_path), "--out", str(out), "--no-figures",
    ])
    assert code == EXIT_OK
    assert not (out / "sweep.png").exists()


def test_oracle_agrees(tmp_path, capsys):
    # a loose cap keeps both modes feasible for this draw
    cfg = small_config(
        qos=dataclasses.replace(small_config().qos, max_power_w=1000.0),
        sweep=None,
    )
    path = tmp_path / "config.json"
    save_config(cfg, path)
    assert main([
        "oracle", "--config", str(path), "--out", str(tmp_path / "o"),
        "--max-hops", "3", "--no-figures",
    ]) == EXIT_OK
    captured = capsys.readouterr().out
    assert captured.count("agree") == 2


def test_oracle_consistent_infeasibility(tmp_path, capsys):
    cfg = small_config(
        qos=dataclasses.replace(small_config().qos, max_power_w=2e-6),
        sweep=None,
    )
    path = tmp_path / "config.json"
    save_config(cfg, path)
    code = main([
        "oracle", "--config", str(path), "--out", str(tmp_path / "o"), "--no-figures",
    ])
    assert code == EXIT_INFEASIBLE
    assert "both infeasible" in capsys.readouterr().out


def test_validate_mc(tmp_path, config_path, capsys):
    out = tmp_path / "mc"
    code = main([
        "validate-mc", "--config", str(config_path), "--out", str(out),
        "--samples", "20000", "--links", "5",
    ])
    assert code == EXIT_OK
    report = json.loads((out / "mc_validation.json").read_text())
    assert len(report["checks"]) == 5
    assert (out / "mc_validation.png").exists()
    assert "all within bound" in capsys.readouterr().out


def test_missing_config_is_config_error(tmp_path, capsys):
    code = main(["plan", "--config", str(tmp_path / "nope.json")])
    assert code == EXIT_CONFIG
    assert "error:" in capsys.readouterr().err


def test_unknown_bundled_name_is_config_error(tmp_path, capsys):
    code = main(["plan", "--config", "demo_alpha9", "--out", str(tmp_path)])
    assert code == EXIT_CONFIG
    assert "error:" in capsys.readouterr().err
