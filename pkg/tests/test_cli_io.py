"""
Tests for file formats and the command-line surface
"""

import importlib
import json

import numpy as np
import pandas as pd
import pytest

import src.config as settings
from main import main
from src import cli_io
from src.cli_io import (
    build_run_config,
    cli_extend,
    cli_norms,
    cli_synth,
    cli_weld,
    experiment_config,
    load_tolerances,
    read_boundary_map,
    read_curve,
    read_field,
    read_function,
    read_norms,
    read_reports,
    read_run_config,
    write_boundary_map,
    write_curve,
    write_field,
    write_function,
    write_reports,
)
from src.core_numerics import (
    HalfPlaneField,
    MonotoneBoundaryMap,
    SampledLineFunction,
    make_half_plane_grid,
    make_line_grid,
)
from src.curve_synthesis import as_angle, curve_from_angle
from src.errors import ConfigValidationError, ParseError
from src.fixtures import sampled, suite_member
from src.models import CheckVerdict, ExperimentReport, RunConfig


@pytest.fixture
def grid():
    return make_line_grid(8.0, 257)


def run_config(command, **kwargs):
    kwargs.setdefault("grid_n", 257)
    kwargs.setdefault("window", 8.0)
    return build_run_config(command, **kwargs)


@pytest.fixture
def reload_settings(monkeypatch):
    """Re-read src.config after changing the environment, restoring it afterwards"""
    yield lambda: importlib.reload(settings)
    monkeypatch.undo()
    importlib.reload(settings)


class TestFiles:
    """Test cases for CSV and JSON readers and writers"""

    def test_function_roundtrip(self, grid, tmp_path):
        f = sampled(grid, "bump", 0.3)
        back = read_function(write_function(f, tmp_path / "f.csv"))
        assert np.array_equal(back.grid.nodes, grid.nodes)
        assert np.array_equal(back.values, f.values)

    def test_complex_function(self, grid, tmp_path):
        f = SampledLineFunction(grid, np.exp(1j * grid.nodes))
        back = read_function(write_function(f, tmp_path / "f.csv"))
        assert np.array_equal(back.values, f.values)

    def test_non_numeric_value(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x,value\n-1,0\n0,0\n1,oops\n")
        with pytest.raises(ParseError) as info:
            read_function(path)
        assert info.value.line == 4

    def test_missing_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x,y\n-1,0\n0,0\n1,0\n")
        with pytest.raises(ParseError) as info:
            read_function(path)
        assert info.value.line == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            read_curve(tmp_path / "absent.csv")

    def test_curve_and_map(self, grid, tmp_path):
        c = curve_from_angle(as_angle(suite_member(grid, "bump_0.3")))
        back = read_curve(write_curve(c, tmp_path / "c.csv"))
        assert np.array_equal(back.points, c.points)
        h = MonotoneBoundaryMap(grid, grid.nodes + 0.1 * np.tanh(grid.nodes))
        h_back = read_boundary_map(write_boundary_map(h, tmp_path / "h.csv"))
        assert h_back.monotone_real
        assert np.array_equal(h_back.values, h.values)

    def test_reports(self, tmp_path):
        report = ExperimentReport(name="demo", checks=[CheckVerdict(name="a", verdict="pass", measured={"x": 1.5})])
        path = write_reports([report], tmp_path / "r.json")
        payload = json.loads(path.read_text())
        assert payload[0]["overall"] == "pass"
        assert read_reports(path)[0].check("a").measured == {"x": 1.5}

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ParseError) as info:
            read_function(path)
        assert info.value.line == 1

    def test_header_only(self, tmp_path):
        path = tmp_path / "header.csv"
        path.write_text("x,value\n")
        with pytest.raises(ParseError) as info:
            read_function(path)
        assert info.value.line == 2

    @pytest.mark.parametrize("orientation", ["upper", "lower"])
    def test_field_roundtrip(self, orientation, tmp_path):
        grid = make_half_plane_grid(make_line_grid(4.0, 65), 7, 2.0, orientation, per_octave=2)
        rng = np.random.default_rng(3)
        values = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        back = read_field(write_field(HalfPlaneField(grid, values), tmp_path / "f.csv"))
        assert back.grid.orientation == orientation
        assert back.grid.per_octave == 2
        assert np.array_equal(back.grid.levels, grid.levels)
        assert np.array_equal(back.grid.x.nodes, grid.x.nodes)
        assert np.array_equal(back.values, values)

    def test_field_with_ragged_levels(self, tmp_path):
        path = tmp_path / "f.csv"
        path.write_text("x,y,re,im\n-1,2,0,0\n0,2,0,0\n1,2,0,0\n-1,1,0,0\n0,1,0,0\n")
        with pytest.raises(ParseError):
            read_field(path)

    def test_bad_json_line(self, tmp_path):
        path = tmp_path / "tol.json"
        path.write_text('{\n  "weld": 1e-3,\n  oops\n}\n')
        with pytest.raises(ParseError) as info:
            load_tolerances(path)
        assert info.value.line == 3


class TestRunConfig:
    """Test cases for run configuration"""

    def test_increasing_ladder(self):
        with pytest.raises(ConfigValidationError):
            build_run_config("verify", ladder=[0.1, 0.2])

    def test_unknown_command(self):
        with pytest.raises(ConfigValidationError):
            build_run_config("plot")

    def test_small_grid(self):
        with pytest.raises(ConfigValidationError):
            build_run_config("norms", grid_n=64)

    @pytest.mark.parametrize("variable, name, raw, expected", [
        ("WP_GRID_N", "grid_n", "513", 513),
        ("WP_WINDOW", "window", "4.5", 4.5),
        ("WP_SEED", "seed", "7", 7),
        ("WP_OUT_DIR", "out_dir", "elsewhere", "elsewhere"),
    ])
    def test_environment_defaults(self, variable, name, raw, expected, monkeypatch, reload_settings):
        monkeypatch.setenv(variable, raw)
        reload_settings()
        assert getattr(RunConfig(command="norms"), name) == expected

    def test_flags_beat_environment(self, monkeypatch, reload_settings):
        monkeypatch.setenv("WP_GRID_N", "513")
        reload_settings()
        assert build_run_config("norms", grid_n=1025).grid_n == 1025

    def test_environment_reaches_outputs(self, grid, tmp_path, monkeypatch, reload_settings):
        monkeypatch.setenv("WP_OUT_DIR", str(tmp_path / "env_out"))
        monkeypatch.setenv("WP_GRID_N", "513")
        reload_settings()
        path = write_function(SampledLineFunction(grid, np.zeros(grid.n)), tmp_path / "b.csv")
        assert main(["synth", str(path), "--no-ledger"]) == 0
        assert read_curve(tmp_path / "env_out" / "curve.csv").n == 513

    def test_read_with_overrides(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"grid_n": 1025, "levels": 7, "inputs": {"angle": "bump_0.1"}}))
        run = read_run_config(path, "verify", levels=9, seed=None)
        assert run.grid_n == 1025 and run.levels == 9
        cfg = experiment_config(run)
        assert cfg.line_grid.n == 1025
        assert cfg.base_angle.b.values.max() == pytest.approx(0.1)


class TestCommands:
    """Test cases for the command implementations"""

    def test_norms_of_constant(self, grid, tmp_path):
        path = write_function(SampledLineFunction(grid, np.full(grid.n, 0.5)), tmp_path / "u.csv")
        code, summary = cli_norms(path, run_config("norms", out_dir=str(tmp_path / "out")))
        assert code == 0
        assert summary["h12"] == 0.0
        assert summary["bmo"] == pytest.approx(0.0, abs=1e-12)
        norms = read_norms(tmp_path / "out" / "norms.json")
        assert set(norms) == {"h12", "bmo", "vmo"}

    def test_synth_zero_angle(self, grid, tmp_path):
        path = write_function(SampledLineFunction(grid, np.zeros(grid.n)), tmp_path / "b.csv")
        code, summary = cli_synth(path, run_config("synth", out_dir=str(tmp_path)))
        assert code == 0
        assert summary["chord_arc"] == pytest.approx(0.0, abs=1e-12)
        assert read_curve(tmp_path / "curve.csv").n == grid.n

    def test_extend(self, grid, tmp_path):
        b = write_function(SampledLineFunction(grid, np.zeros(grid.n)), tmp_path / "b.csv")
        u = write_function(sampled(grid, "bump", 0.1), tmp_path / "u.csv")
        code, summary = cli_extend(b, u, run_config("extend", levels=6, out_dir=str(tmp_path)))
        assert code == 0
        assert 0 < summary["sup_mu"] < 1
        mu = pd.read_csv(tmp_path / "mu.csv")
        assert list(mu.columns) == ["x", "y", "re", "im"]
        assert len(mu) == 6 * grid.n
        assert summary["source"] == "base"
        stages = json.loads((tmp_path / "beltrami.json").read_text())["stages"]
        assert stages == {"switched_to_base": "tangent angle is identically zero"}

    def test_extend_general(self, grid, tmp_path):
        b = write_function(suite_member(grid, "bump_0.1"), tmp_path / "b.csv")
        u = write_function(sampled(grid, "bump", 0.1), tmp_path / "u.csv")
        code, summary = cli_extend(b, u, run_config("extend", levels=6, out_dir=str(tmp_path)))
        assert code == 0
        assert summary["source"] == "general"
        stages = json.loads((tmp_path / "beltrami.json").read_text())["stages"]
        assert "switched_to_base" not in stages and "tau" in stages

    def test_inputs_resampled_to_run_grid(self, grid, tmp_path):
        path = write_function(sampled(grid, "bump", 0.2), tmp_path / "u.csv")
        _, coarse = cli_norms(path, run_config("norms", out_dir=str(tmp_path)))
        _, fine = cli_norms(path, run_config("norms", grid_n=1025, out_dir=str(tmp_path)))
        assert read_norms(tmp_path / "norms.json")["h12"].grid_size == 1025
        assert fine["h12"] == pytest.approx(coarse["h12"], rel=0.05)

    def test_synth_window(self, grid, tmp_path):
        path = write_function(SampledLineFunction(grid, np.zeros(grid.n)), tmp_path / "b.csv")
        cli_synth(path, run_config("synth", window=4.0, out_dir=str(tmp_path)))
        curve = read_curve(tmp_path / "curve.csv")
        assert curve.arc_lengths[0] == pytest.approx(-4.0) and curve.arc_lengths[-1] == pytest.approx(4.0)

    def test_weld(self, tmp_path):
        grid = make_line_grid(8.0, 1025)
        path = write_curve(curve_from_angle(as_angle(suite_member(grid, "bump_0.1"))), tmp_path / "c.csv")
        code, summary = cli_weld(path, run_config("weld", resolution=512, out_dir=str(tmp_path)))
        assert code == 0
        assert summary["log_h_prime_h12"] > 0
        welding = pd.read_csv(tmp_path / "welding.csv")
        assert list(welding.columns) == ["x", "re", "im", "log_h_prime"]

    def test_weld_window(self, tmp_path):
        grid = make_line_grid(8.0, 1025)
        path = write_curve(curve_from_angle(as_angle(suite_member(grid, "bump_0.1"))), tmp_path / "c.csv")
        cli_weld(path, run_config("weld", window=6.0, resolution=512, out_dir=str(tmp_path)))
        welding = pd.read_csv(tmp_path / "welding.csv")
        assert welding["x"].abs().max() == pytest.approx(6.0)


class TestMain:
    """Test cases for the main entry point"""

    def test_norms(self, grid, tmp_path):
        path = write_function(sampled(grid, "bump", 0.2), tmp_path / "u.csv")
        assert main(["norms", str(path), "--out", str(tmp_path), "--no-ledger"]) == 0
        assert (tmp_path / "norms.json").exists()

    def test_missing_input(self, tmp_path):
        assert main(["norms", str(tmp_path / "absent.csv"), "--no-ledger"]) == 1

    def test_wrong_input_count(self, tmp_path):
        assert main(["extend", str(tmp_path / "b.csv"), "--no-ledger"]) == 1

    def test_verify_zero(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"grid_n": 513, "resolution": 512, "levels": 6,
                                    "inputs": {"angle": "zero", "perturbation": "zero"}}))
        assert main(["verify", str(path), "--out", str(tmp_path / "a"), "--no-ledger"]) == 0
        reports = read_reports(tmp_path / "a" / "report.json")
        assert [r.overall for r in reports] == ["pass"] * 5
        assert main(["verify", str(path), "--out", str(tmp_path / "b"), "--no-ledger"]) == 0
        assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()

    def test_sweep_columns(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"grid_n": 513, "resolution": 512, "levels": 6,
                                    "inputs": {"angle": "zero", "perturbation": "zero"}}))
        assert main(["sweep", str(path), "--out", str(tmp_path), "--no-ledger"]) == 0
        frame = pd.read_csv(tmp_path / "continuity.csv")
        assert list(frame.columns) == ["epsilon", "forward", "h1", "h2", "g", "reverse"]
        assert (frame[["forward", "h1", "h2", "g"]] == 0).all().all()

    def test_usage_error_exit_code(self):
        with pytest.raises(SystemExit) as info:
            main(["plot"])
        assert info.value.code == 1

    def test_bad_option_exit_code(self):
        with pytest.raises(SystemExit) as info:
            main(["norms", "u.csv", "--grid", "many"])
        assert info.value.code == 1

    def test_empty_input(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        assert main(["norms", str(path), "--no-ledger"]) == 1

    def test_unexpected_error_is_recorded(self, grid, tmp_path, monkeypatch):
        import src.db as db
        url = f"sqlite:///{tmp_path / 'ledger.db'}"
        monkeypatch.setattr(db, "DB_URL", url)

        def broken(*args):
            raise RuntimeError("disk on fire")

        monkeypatch.setattr(cli_io, "cli_norms", broken)
        path = write_function(sampled(grid, "bump", 0.2), tmp_path / "u.csv")
        assert main(["norms", str(path), "--out", str(tmp_path)]) == 2
        runs = db.recent_runs(url=url)
        assert len(runs) == 1 and runs[0].exit_code == 2

    def test_ledger(self, grid, tmp_path, monkeypatch):
        import src.db as db
        url = f"sqlite:///{tmp_path / 'ledger.db'}"
        monkeypatch.setattr(db, "DB_URL", url)
        path = write_function(sampled(grid, "bump", 0.2), tmp_path / "u.csv")
        assert main(["norms", str(path), "--out", str(tmp_path)]) == 0
        runs = db.recent_runs(url=url)
        assert len(runs) == 1 and runs[0].command == "norms" and runs[0].exit_code == 0
