import json
import math
import os

import numpy as np
import pytest

from freehorizon.cli import (EXIT_CONFIG, EXIT_OK, EXPERIMENTS, ConfigError, ExperimentSpec,
                             SWEEP_HEADER, emit_csv, emit_json, emit_trajectory_csv, main,
                             parse_csv, parse_json, parse_trajectory_csv, resolve_spec,
                             run_experiment)
from freehorizon.regularizer import SweepRecord

FAST_SPEC = ExperimentSpec(model="pendulum", x0=(5 * math.pi / 12, 0.0), M=0.5,
                           T_list=tuple(range(1, 13)), total_steps=60, t_max=20, id=4)


@pytest.fixture(scope="module")
def fast_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("fast_run")
    result = run_experiment(FAST_SPEC, str(out))
    return result, out


def test_registry_matches_benchmark_table():
    assert sorted(EXPERIMENTS) == [1, 2, 3, 4]
    pi = math.pi
    assert EXPERIMENTS[1].model == "cartpole"
    assert EXPERIMENTS[1].x0 == (0.0, 0.0, 0.0, 0.0)
    assert EXPERIMENTS[2].x0 == (0.0, 3 * pi / 4, 0.0, 0.0)
    assert EXPERIMENTS[3].model == "pendulum"
    assert EXPERIMENTS[3].x0 == (0.0, 0.0)
    assert EXPERIMENTS[4].x0 == (5 * pi / 12, 0.0)
    for spec in EXPERIMENTS.values():
        assert spec.dt == 0.1
        assert spec.total_steps == 150
        assert spec.T_list == tuple(range(1, 41))


def test_goal_states_default_to_table_rows():
    from freehorizon import make_model
    assert np.allclose(make_model("cartpole").x_goal, [0.0, math.pi, 0.0, 0.0])
    assert np.allclose(make_model("pendulum").x_goal, [math.pi, 0.0])


def test_sweep_csv_round_trip(tmp_path):
    records = [
        SweepRecord(T=1, fh_cost=1.5, transfer_cost=0.25, expected_regulation_cost=1.25,
                    actual_regulation_cost=1.3, total_composite_cost=1.55,
                    terminal_error=0.7071067811865476, hit_omega=False, solver_iterations=7),
        SweepRecord(T=2, fh_cost=0.123456789012345678, transfer_cost=0.4,
                    expected_regulation_cost=1e-17, actual_regulation_cost=3.3e222,
                    total_composite_cost=3.3e222, terminal_error=0.0, hit_omega=True,
                    solver_iterations=0),
    ]
    path = str(tmp_path / "sweep.csv")
    emit_csv(records, path)
    assert parse_csv(path) == records


def test_empty_and_single_record_files(tmp_path):
    path = str(tmp_path / "sweep.csv")
    emit_csv([], path)
    with open(path) as fh:
        lines = fh.read().splitlines()
    assert lines == [SWEEP_HEADER]
    assert parse_csv(path) == []

    rec = SweepRecord(T=3, fh_cost=2.0, transfer_cost=1.0, expected_regulation_cost=1.0,
                      actual_regulation_cost=1.0, total_composite_cost=2.0,
                      terminal_error=1.0, hit_omega=True, solver_iterations=2)
    emit_csv([rec], path)
    with open(path) as fh:
        assert len(fh.read().splitlines()) == 2
    assert parse_csv(path) == [rec]


def test_trajectory_csv_round_trip(tmp_path):
    from freehorizon import default_cost, linearize_discrete, lqr_rollout, make_model, solve_dare
    m = make_model("pendulum")
    cost = default_cost("pendulum")
    ric = solve_dare(linearize_discrete(m, 0.1), cost)
    traj = lqr_rollout(m, ric.K, [math.pi - 0.2, 0.0], 30, 0.1, cost)
    path = str(tmp_path / "trajectory.csv")
    emit_trajectory_csv(traj, 12, path)
    ts, phases, states, controls = parse_trajectory_csv(path)
    assert list(ts) == list(range(30))
    assert phases[:12] == ["transfer"] * 12 and set(phases[12:]) == {"regulate"}
    np.testing.assert_array_equal(states, traj.states[:30])
    np.testing.assert_array_equal(controls, traj.controls)


def test_run_experiment_writes_all_files(fast_run):
    result, out = fast_run
    for name in ("sweep.csv", "solution.json", "trajectory.csv"):
        assert (out / name).exists()
    assert result.hit
    assert result.T_star <= 15
    assert len(result.records) == len(FAST_SPEC.T_list)


def test_solution_json_round_trip(fast_run):
    result, out = fast_run
    parsed = parse_json(str(out / "solution.json"))
    assert parsed == result


def test_degenerate_spec_at_goal(tmp_path):
    spec = ExperimentSpec(model="pendulum", x0=(math.pi, 0.0), M=0.5,
                          T_list=(1, 2, 3), total_steps=30)
    result = run_experiment(spec, str(tmp_path))
    assert result.T_star == 0
    assert result.J_M == pytest.approx(0.0, abs=1e-18)
    assert result.total_composite_cost == pytest.approx(0.0, abs=1e-18)


def test_repeat_runs_byte_identical(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    run_experiment(FAST_SPEC, str(out1))
    run_experiment(FAST_SPEC, str(out2))
    for name in ("sweep.csv", "solution.json", "trajectory.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_precedence_flags_over_config_over_registry(tmp_path):
    base = EXPERIMENTS[4]
    config = {"dt": 0.05, "M": 1.0}
    overrides = {"M": 0.25}
    spec = resolve_spec(base, config, overrides)
    assert spec.M == 0.25            # flag beats config
    assert spec.dt == 0.05           # config beats registry
    assert spec.total_steps == 150   # registry default survives
    assert spec.x0 == base.x0

    spec2 = resolve_spec(base, {}, {})
    assert spec2 == base

    spec3 = resolve_spec(base, {"x0": [0.1, 0.0]}, {})
    assert spec3.x0 == (0.1, 0.0)


def test_config_matrix_forms():
    base = EXPERIMENTS[3]
    spec = resolve_spec(base, {"Q": [2.0, 0.5], "R": [[0.3]]}, {})
    assert spec.Q == ((2.0, 0.0), (0.0, 0.5))
    assert spec.R == ((0.3,),)
    with pytest.raises(ConfigError):
        resolve_spec(base, {"Q": [1.0, 2.0, 3.0]}, {})
    with pytest.raises(ConfigError):
        resolve_spec(base, {"bogus_key": 1}, {})
    with pytest.raises(ConfigError):
        resolve_spec(None, {}, {"model": "pendulum"})  # x0 missing


def test_cli_invalid_config_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code = main(["sweep", "--model", "pendulum", "--x0", "0,0",
                 "--config", str(bad), "--out", str(tmp_path)])
    assert code == EXIT_CONFIG
    assert "error" in capsys.readouterr().err


def test_cli_regulate_subcommand(tmp_path, capsys):
    code = main(["regulate", "--model", "pendulum", "--x0", "3.0,0.0",
                 "--steps", "50", "--out", str(tmp_path)])
    assert code == EXIT_OK
    ts, phases, states, controls = parse_trajectory_csv(str(tmp_path / "trajectory.csv"))
    assert set(phases) == {"regulate"}
    assert len(ts) == 50


def test_cli_solve_subcommand(tmp_path, capsys):
    code = main(["solve", "--model", "pendulum", "--x0", "1.3,0.0", "--M", "0.5",
                 "--steps", "60", "--t-max", "20", "--out", str(tmp_path)])
    assert code == EXIT_OK
    ts, phases, states, controls = parse_trajectory_csv(str(tmp_path / "trajectory.csv"))
    assert "transfer" in phases and "regulate" in phases
    out = capsys.readouterr().out
    assert "T_star=" in out


def test_cli_experiment_with_overrides(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"T_list": list(range(1, 11)), "total_steps": 60,
                               "t_max": 20}))
    code = main(["experiment", "4", "--config", str(cfg), "--out", str(tmp_path)])
    assert code == EXIT_OK
    records = parse_csv(str(tmp_path / "sweep.csv"))
    assert [r.T for r in records] == list(range(1, 11))
    parsed = parse_json(str(tmp_path / "solution.json"))
    assert parsed.spec.total_steps == 60
    assert parsed.spec.id == 4


def test_cli_emit_trajectories_flag(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"T_list": [2, 4], "total_steps": 40, "t_max": 20}))
    code = main(["experiment", "4", "--config", str(cfg), "--out", str(tmp_path),
                 "--emit-trajectories"])
    assert code == EXIT_OK
    assert (tmp_path / "trajectory_T2.csv").exists()
    assert (tmp_path / "trajectory_T4.csv").exists()
    ts, phases, _, _ = parse_trajectory_csv(str(tmp_path / "trajectory_T4.csv"))
    assert phases[:4] == ["transfer"] * 4
    assert len(ts) == 40
