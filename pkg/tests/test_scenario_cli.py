"""Tests for scenario file ingestion, output emission, and the CLI."""
import csv
from pathlib import Path

import numpy as np
import pytest
import yaml
from click.testing import CliRunner

from hjplan import cli, scenario as scn_io, vehicles

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"


def _write_yaml(path, data):
    with open(path, "w") as fh:
        yaml.safe_dump(data, fh, sort_keys=False)
    return path


def _minimal_scenario(tmp_path, **overrides):
    data = {
        "schema_version": 1,
        "id": "mini",
        "model": {"kind": "car", "w_max": 2.0},
        "start": [0.0, 0.0, 0.0],
        "goal": [1.0, 0.0, 0.0],
        "horizon": 1.2,
        "solver": {"max_iters": 5000},
        "seed": 0,
    }
    data.update(overrides)
    return _write_yaml(tmp_path / "mini.yaml", data)


class TestLoadScenario:
    def test_committed_scenarios_parse(self):
        for path in sorted(SCENARIO_DIR.glob("*.yaml")):
            scn = scn_io.load_scenario(path)
            assert scn.model.state_dim == scn.start.shape[0]

    def test_minimal_fields(self, tmp_path):
        scn = scn_io.load_scenario(_minimal_scenario(tmp_path))
        assert scn.scenario_id == "mini"
        assert scn.model.kind == vehicles.CAR
        assert scn.horizon == 1.2
        assert not scn.obstacles.balls

    def test_missing_model_rejected(self, tmp_path):
        path = _minimal_scenario(tmp_path)
        data = yaml.safe_load(path.read_text())
        del data["model"]
        _write_yaml(path, data)
        with pytest.raises(scn_io.ScenarioError, match="model"):
            scn_io.load_scenario(path)

    def test_unknown_schema_version(self, tmp_path):
        path = _minimal_scenario(tmp_path, schema_version=99)
        with pytest.raises(scn_io.ScenarioError, match="schema_version"):
            scn_io.load_scenario(path)

    def test_bad_start_length(self, tmp_path):
        path = _minimal_scenario(tmp_path, start=[0.0, 0.0])
        with pytest.raises(scn_io.ScenarioError, match="start"):
            scn_io.load_scenario(path)

    def test_negative_horizon(self, tmp_path):
        path = _minimal_scenario(tmp_path, horizon=-1.0)
        with pytest.raises(scn_io.ScenarioError, match="horizon"):
            scn_io.load_scenario(path)

    def test_auto_horizon_requires_bracket(self, tmp_path):
        path = _minimal_scenario(tmp_path, horizon="auto")
        with pytest.raises(scn_io.ScenarioError, match="horizon_bracket"):
            scn_io.load_scenario(path)

    def test_unknown_solver_field(self, tmp_path):
        path = _minimal_scenario(tmp_path, solver={"step": 0.1})
        with pytest.raises(scn_io.ScenarioError, match="solver.step"):
            scn_io.load_scenario(path)

    def test_bad_motion_kind(self, tmp_path):
        path = _minimal_scenario(tmp_path, obstacles={
            "balls": [{"center": [0.5, 0.5], "radius": 0.2,
                       "motion": {"kind": "wobble"}}],
        })
        with pytest.raises(scn_io.ScenarioError, match="motion.kind"):
            scn_io.load_scenario(path)

    def test_nonpositive_radius(self, tmp_path):
        path = _minimal_scenario(tmp_path, obstacles={
            "balls": [{"center": [0.5, 0.5], "radius": 0.0}],
        })
        with pytest.raises(scn_io.ScenarioError, match="radius"):
            scn_io.load_scenario(path)

    def test_rotating_ball_parsed(self, tmp_path):
        path = _minimal_scenario(tmp_path, obstacles={
            "balls": [{"center": [0.5, 0.5], "radius": 0.2,
                       "motion": {"kind": "rotation", "center": [0.0, 0.0],
                                  "rate": -1.0}}],
        })
        scn = scn_io.load_scenario(path)
        ball = scn.obstacles.balls[0]
        assert ball.rotation_rate == -1.0
        np.testing.assert_array_equal(ball.rotation_center, [0.0, 0.0])


class TestRasterGrid:
    def test_orientation(self, tmp_path):
        # first text row is the top of the map (highest y index)
        grid_file = tmp_path / "grid.txt"
        grid_file.write_text("10\n00\n")
        occ = scn_io.load_raster_grid(grid_file)
        assert occ.shape == (2, 2)
        assert occ[0, 1] and not occ[0, 0]
        assert not occ[1, 0] and not occ[1, 1]

    def test_ragged_rows_rejected(self, tmp_path):
        grid_file = tmp_path / "grid.txt"
        grid_file.write_text("10\n000\n")
        with pytest.raises(scn_io.ScenarioError):
            scn_io.load_raster_grid(grid_file)

    def test_raster_scenario_decomposes(self):
        scn = scn_io.load_scenario(SCENARIO_DIR / "car_raster.yaml")
        assert scn.decomposed_balls
        assert all(b.radius >= 0.15 for b in scn.decomposed_balls)


class TestWriteScenario:
    def test_round_trip(self, tmp_path):
        original = scn_io.load_scenario(SCENARIO_DIR / "car_rotating.yaml")
        out = tmp_path / "copy.yaml"
        scn_io.write_scenario(original, out)
        copy = scn_io.load_scenario(out)
        assert copy.scenario_id == original.scenario_id
        np.testing.assert_array_equal(copy.start, original.start)
        np.testing.assert_array_equal(copy.goal, original.goal)
        assert copy.horizon == original.horizon
        assert len(copy.obstacles.balls) == len(original.obstacles.balls)
        for a, b in zip(copy.obstacles.balls, original.obstacles.balls):
            np.testing.assert_array_equal(a.center, b.center)
            assert a.radius == b.radius
            assert a.motion_kind == b.motion_kind


class TestRun:
    def test_outputs_written(self, tmp_path):
        scn = scn_io.load_scenario(_minimal_scenario(tmp_path))
        summary = scn_io.run(scn, tmp_path / "out")
        assert summary.converged
        traj_path = tmp_path / "out" / "mini_trajectory.csv"
        summary_path = tmp_path / "out" / "mini_summary.yaml"
        assert traj_path.exists() and summary_path.exists()

        with open(traj_path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == summary.num_steps + 1
        for row in rows:
            t_eq, t_phys = float(row["t_eq"]), float(row["t_phys"])
            assert t_eq + t_phys == pytest.approx(summary.horizon)
            assert float(row["free_space"]) == 1.0
        # last node is the pinned start state
        assert float(rows[-1]["x"]) == 0.0

        data = yaml.safe_load(summary_path.read_text())
        assert data["converged"]
        assert data["terminal_distance"] <= 0.15


class TestCli:
    def test_solve_exit_ok(self, tmp_path):
        path = _minimal_scenario(tmp_path)
        runner = CliRunner()
        result = runner.invoke(
            cli.main, ["solve", "--scenario", str(path),
                       "--output", str(tmp_path / "out")],
        )
        assert result.exit_code == cli.EXIT_OK
        assert "converged" in result.output
        assert (tmp_path / "out" / "mini_summary.yaml").exists()

    def test_solve_exit_not_converged(self, tmp_path):
        path = _minimal_scenario(tmp_path)
        runner = CliRunner()
        result = runner.invoke(
            cli.main, ["solve", "--scenario", str(path),
                       "--output", str(tmp_path / "out"), "--max-iters", "3"],
        )
        assert result.exit_code == cli.EXIT_NOT_CONVERGED

    def test_solve_exit_error_on_bad_file(self, tmp_path):
        bad = _write_yaml(tmp_path / "bad.yaml", {"schema_version": 1})
        runner = CliRunner()
        result = runner.invoke(cli.main, ["solve", "--scenario", str(bad)])
        assert result.exit_code == cli.EXIT_ERROR

    def test_min_horizon(self, tmp_path):
        path = _minimal_scenario(
            tmp_path, horizon="auto", horizon_bracket=[0.5, 2.0],
        )
        runner = CliRunner()
        result = runner.invoke(
            cli.main, ["min-horizon", "--scenario", str(path), "--quiet"],
        )
        assert result.exit_code == cli.EXIT_OK
        assert float(result.output.strip()) == pytest.approx(1.0, abs=0.15)

    def test_decompose(self, tmp_path):
        out = tmp_path / "balls.yaml"
        runner = CliRunner()
        result = runner.invoke(
            cli.main, ["decompose",
                       "--scenario", str(SCENARIO_DIR / "car_raster.yaml"),
                       "--output", str(out)],
        )
        assert result.exit_code == cli.EXIT_OK
        data = yaml.safe_load(out.read_text())
        assert data["balls"]
        assert all(b["radius"] >= 0.15 for b in data["balls"])

    def test_decompose_requires_raster(self, tmp_path):
        path = _minimal_scenario(tmp_path)
        runner = CliRunner()
        result = runner.invoke(
            cli.main, ["decompose", "--scenario", str(path),
                       "--output", str(tmp_path / "balls.yaml")],
        )
        assert result.exit_code == cli.EXIT_ERROR

    def test_batch(self, tmp_path):
        a = _minimal_scenario(tmp_path)
        b = _write_yaml(tmp_path / "mini2.yaml", {
            **yaml.safe_load(a.read_text()), "id": "mini2",
        })
        runner = CliRunner()
        result = runner.invoke(
            cli.main, ["batch", "--scenario", str(a), "--scenario", str(b),
                       "--output", str(tmp_path / "out"), "--quiet"],
        )
        assert result.exit_code == cli.EXIT_OK
        assert (tmp_path / "out" / "mini_summary.yaml").exists()
        assert (tmp_path / "out" / "mini2_summary.yaml").exists()
