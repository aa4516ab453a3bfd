"""Runner plumbing: config grammar, emitted files, exit codes, determinism.

Physics lives in the solver suites; here the contract is that configs are
validated with field-level messages, artifacts follow their schemas, and
identical configs reproduce identical bytes.
"""

import json
import math
import os

import numpy as np
import pytest

from stabwave import cli
from stabwave.cli import (
    build_model,
    diagnose,
    main,
    read_config,
    run_experiment,
    selftest,
    sweep,
)
from stabwave.errors import ConfigError, IllConditioned
from stabwave.extrap import VemConfig
from stabwave.spectral import Grid2D

BOUSSINESQ_LINES = """
model.kind = boussinesq
model.preset = classical
model.speed = 1.3
grid.half_length = 64
grid.points = 1024
guess.kind = sech2
accel.kind = vem
accel.method = mpe
accel.kappa = 9
stop.tol = 1e-13
stop.max_iters = 400
timing = none
seed = 0
"""

TOY_LINES = """
model.kind = toy
grid.half_length = 8
grid.points = 16
guess.kind = gaussian
guess.amplitude = 0.8
guess.width = 0.5
stop.tol = 1e-12
stop.max_iters = 200
timing = none
"""


def write_config(tmp_path, body, out_dir, name="run.cfg", extra=""):
    text = body + "out.dir = %s\n" % out_dir + extra
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestConfigGrammar:
    def test_full_roundtrip(self, tmp_path):
        path = write_config(tmp_path, BOUSSINESQ_LINES, tmp_path / "out")
        config = read_config(path)
        assert config.model["kind"] == "boussinesq"
        assert config.grid.points == 1024
        assert isinstance(config.accel, VemConfig)
        assert config.accel.kappa == 9
        assert config.stopping.tol == 1e-13
        assert config.timing == "none"
        assert config.seed == 0
        assert config.outputs["trace"].endswith("trace.csv")

    def test_comments_and_blank_lines_ignored(self, tmp_path):
        body = "# leading comment\n\nmodel.kind = toy  # trailing\n" \
            "grid.half_length = 8\ngrid.points = 16\n" \
            "stop.tol = 1e-10\nstop.max_iters = 5\n"
        config = read_config(write_config(tmp_path, body, tmp_path))
        assert config.model["kind"] == "toy"

    def test_unknown_key_rejected(self, tmp_path):
        path = write_config(tmp_path, TOY_LINES, tmp_path, extra="stop.tole = 1\n")
        with pytest.raises(ConfigError, match="stop.tole"):
            read_config(path)

    def test_duplicate_key_rejected(self, tmp_path):
        path = write_config(tmp_path, TOY_LINES, tmp_path,
                            extra="stop.tol = 1e-9\n")
        with pytest.raises(ConfigError, match="duplicate"):
            read_config(path)

    def test_malformed_line_names_line_number(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("model.kind = toy\nnonsense without equals\n")
        with pytest.raises(ConfigError, match="line 2"):
            read_config(str(path))

    def test_numeric_validation(self, tmp_path):
        path = write_config(
            tmp_path, TOY_LINES.replace("stop.tol = 1e-12", "stop.tol = -1"),
            tmp_path)
        with pytest.raises(ConfigError, match="stop.tol"):
            read_config(path)

    def test_widths_range_and_list_forms(self, tmp_path):
        extra = "sweep.methods = mpe\nsweep.widths = 2..5\n"
        config = read_config(
            write_config(tmp_path, TOY_LINES, tmp_path, extra=extra))
        assert config.sweep_widths == (2, 3, 4, 5)
        extra = "sweep.methods = mpe\nsweep.widths = 9,3,7\n"
        config = read_config(
            write_config(tmp_path, TOY_LINES, tmp_path, "b.cfg", extra))
        assert config.sweep_widths == (9, 3, 7)

    def test_unknown_sweep_method_rejected(self, tmp_path):
        extra = "sweep.methods = mpe,epsilon\nsweep.widths = 2\n"
        path = write_config(tmp_path, TOY_LINES, tmp_path, extra=extra)
        with pytest.raises(ConfigError, match="sweep.methods"):
            read_config(path)

    def test_outdir_environment_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("STABWAVE_OUTDIR", str(tmp_path / "forced"))
        config = read_config(write_config(tmp_path, TOY_LINES, tmp_path / "cfgd"))
        assert config.outputs["dir"] == str(tmp_path / "forced")

    def test_2d_grid_keys(self, tmp_path):
        body = (
            "model.kind = benjamin2d\nmodel.speed = 1\nmodel.Gamma = 0.5\n"
            "grid.half_length_x = 32\ngrid.points_x = 64\n"
            "grid.half_length_z = 32\ngrid.points_z = 64\n"
            "guess.kind = kp_lump\nstop.tol = 1e-8\nstop.max_iters = 50\n"
        )
        config = read_config(write_config(tmp_path, body, tmp_path))
        assert isinstance(config.grid, Grid2D)
        model = build_model(config)
        assert model.size == 64 * 64


@pytest.fixture(scope="module")
def accelerated(tmp_path_factory):
    tmp_path = tmp_path_factory.mktemp("solve")
    out = tmp_path / "out"
    config = read_config(write_config(tmp_path, BOUSSINESQ_LINES, out))
    summary = run_experiment(config)
    return config, summary, out


class TestRunExperiment:
    def test_accelerated_benchmark_iteration_count(self, accelerated):
        _, summary, _ = accelerated
        assert summary.reason == "converged"
        assert 20 <= summary.iterations <= 30
        assert summary.final_res < 1e-13

    def test_summary_json_schema(self, accelerated):
        _, summary, out = accelerated
        payload = json.loads((out / "summary.json").read_text())
        assert set(payload) == {
            "model", "method", "width", "iterations", "final_res",
            "reason", "seconds"}
        assert payload["model"] == "boussinesq"
        assert payload["method"] == "mpe"
        assert payload["width"] == 9
        assert payload["iterations"] == summary.iterations
        assert payload["final_res"] == summary.final_res
        assert payload["seconds"] == 0.0

    def test_trace_schema_and_finiteness(self, accelerated):
        _, summary, out = accelerated
        raw = (out / "trace.csv").read_bytes()
        assert b"\r" not in raw
        lines = raw.decode().strip().split("\n")
        assert lines[0] == "iter,res,diff,sfe,seconds"
        assert len(lines) == summary.iterations + 2
        for n, line in enumerate(lines[1:]):
            fields = line.split(",")
            assert int(fields[0]) == n
            res = float(fields[1])
            # RES stays finite on every row, including the last
            assert math.isfinite(res)

    def test_profile_roundtrip(self, accelerated):
        config, _, out = accelerated
        model = build_model(config)
        table = np.genfromtxt(out / "profile.csv", delimiter=",", skip_header=1)
        assert table.shape == (1024, 3)
        assert np.allclose(table[:, 0], model.grid.nodes)
        # the two component columns decay to the background at the edge
        assert abs(table[0, 1]) < 1e-10 and abs(table[0, 2]) < 1e-10

    def test_byte_identical_rerun(self, tmp_path):
        first = read_config(
            write_config(tmp_path, TOY_LINES, tmp_path / "a", "a.cfg"))
        second = read_config(
            write_config(tmp_path, TOY_LINES, tmp_path / "b", "b.cfg"))
        run_experiment(first)
        run_experiment(second)
        for name in ("trace.csv", "profile.csv", "summary.json"):
            left = (tmp_path / "a" / name).read_bytes()
            right = (tmp_path / "b" / name).read_bytes()
            assert left == right

    def test_zero_iteration_budget(self, tmp_path):
        body = TOY_LINES.replace("stop.max_iters = 200", "stop.max_iters = 0")
        config = read_config(write_config(tmp_path, body, tmp_path / "out"))
        summary = run_experiment(config)
        assert summary.iterations == 0
        assert summary.reason == "max_iters"


class TestSweep:
    def test_single_point_range_gives_one_row(self, tmp_path):
        extra = "sweep.methods = mpe\nsweep.widths = 4\n"
        config = read_config(
            write_config(tmp_path, TOY_LINES, tmp_path / "out", extra=extra))
        cells = sweep(config)
        assert len(cells) == 1
        assert cells[0].method == "mpe" and cells[0].width == 4
        assert cells[0].best

    def test_rows_sorted_and_best_flag_per_method(self, tmp_path):
        extra = "sweep.methods = mpe,rre\nsweep.widths = 3,2,4\n"
        config = read_config(
            write_config(tmp_path, TOY_LINES, tmp_path / "out", extra=extra))
        cells = sweep(config)
        assert [c.width for c in cells] == [2, 3, 4, 2, 3, 4]
        assert [c.method for c in cells] == ["mpe"] * 3 + ["rre"] * 3
        for method in ("mpe", "rre"):
            group = [c for c in cells if c.method == method]
            assert sum(c.best for c in group) == 1
            winner = [c for c in group if c.best][0]
            floor = min(c.iterations for c in group if c.reason == "converged")
            assert winner.iterations == floor
        table = (tmp_path / "out" / "sweep.csv").read_text().strip().split("\n")
        assert table[0] == "method,width,iterations,final_res,reason,best"
        assert len(table) == 7

    def test_cell_failure_recorded_without_aborting(self, tmp_path, monkeypatch):
        real_run = cli.run

        def flaky(*args, **kwargs):
            accel = kwargs.get("accel")
            if accel is not None and getattr(accel, "kappa", None) == 3:
                raise IllConditioned(1e18)
            return real_run(*args, **kwargs)

        monkeypatch.setattr(cli, "run", flaky)
        extra = "sweep.methods = mpe\nsweep.widths = 2..4\n"
        config = read_config(
            write_config(tmp_path, TOY_LINES, tmp_path / "out", extra=extra))
        cells = sweep(config)
        assert [c.reason for c in cells] == [
            "converged", "error:IllConditioned", "converged"]
        broken = cells[1]
        assert broken.iterations == -1 and not broken.best
        assert math.isinf(broken.final_res)

    def test_no_converged_cell_flags_nothing(self, tmp_path):
        body = TOY_LINES.replace("stop.max_iters = 200", "stop.max_iters = 1")
        extra = "sweep.methods = mpe\nsweep.widths = 2,3\n"
        config = read_config(
            write_config(tmp_path, body, tmp_path / "out", extra=extra))
        cells = sweep(config)
        assert all(c.reason == "max_iters" for c in cells)
        assert not any(c.best for c in cells)

    def test_interfacial_lump_window_sweep_has_no_failures(self, tmp_path):
        # seven full 2D solves; the slowest test in this file
        body = (
            "model.kind = benjamin2d\nmodel.speed = 1\nmodel.Gamma = 0.99\n"
            "grid.half_length_x = 128\ngrid.points_x = 512\n"
            "grid.half_length_z = 128\ngrid.points_z = 512\n"
            "guess.kind = kp_lump\nstop.tol = 1e-8\nstop.max_iters = 300\n"
            "timing = none\n"
            "sweep.methods = anderson_type2\nsweep.widths = 1..7\n"
        )
        config = read_config(write_config(tmp_path, body, tmp_path / "out"))
        cells = sweep(config)
        assert len(cells) == 7
        assert all(c.reason == "converged" for c in cells)


class TestDiagnose:
    def write_impulse(self, tmp_path):
        lines = ["x,u"]
        for j in range(16):
            value = 1.0 if j == 8 else 0.0
            lines.append("%g,%g" % (-8.0 + j, value))
        path = tmp_path / "impulse.csv"
        path.write_text("\n".join(lines) + "\n")
        return str(path)

    def test_toy_impulse_has_degree_eigenvalue(self, tmp_path):
        config = read_config(
            write_config(tmp_path, TOY_LINES, tmp_path / "out",
                         extra="diagnose.count = 4\n"))
        plain, stabilized = diagnose(config, self.write_impulse(tmp_path))
        assert abs(plain.eigenvalues[0] - 2.0) <= 1e-12
        assert np.all(np.abs(stabilized.eigenvalues) <= 1e-12)
        payload = json.loads((tmp_path / "out" / "spectrum.json").read_text())
        assert set(payload) == {"model", "count", "plain", "stabilized"}
        assert payload["count"] == 4
        assert payload["plain"][0]["re"] == pytest.approx(2.0)
        for entry in payload["plain"] + payload["stabilized"]:
            assert set(entry) == {"re", "im", "residual"}

    def test_dimension_mismatch_rejected(self, tmp_path):
        config = read_config(
            write_config(tmp_path, TOY_LINES, tmp_path / "out"))
        short = tmp_path / "short.csv"
        short.write_text("x,u\n0,1\n1,0\n")
        with pytest.raises(ConfigError, match="profile"):
            diagnose(config, str(short))

    def test_single_well_profile_spectra_end_to_end(self, tmp_path):
        body = (
            "model.kind = nls\nmodel.mu = 6.3\n"
            "grid.half_length = 32\ngrid.points = 512\n"
            "guess.kind = sech2\nguess.amplitude = 2\n"
            "stop.tol = 1e-12\nstop.max_iters = 200\ntiming = none\n"
        )
        config = read_config(write_config(tmp_path, body, tmp_path / "out"))
        summary = run_experiment(config)
        assert summary.reason == "converged"
        plain, stabilized = diagnose(
            config, str(tmp_path / "out" / "profile.csv"))
        assert abs(plain.eigenvalues[0] - 3.0) <= 1e-3
        assert abs(stabilized.eigenvalues[0] - 0.6098684) <= 1e-3
        for report in (plain, stabilized):
            scale = np.maximum(np.abs(report.eigenvalues), 1.0)
            assert np.all(report.residual_norms <= 1e-6 * scale)


class TestMainExitCodes:
    def test_converged_solve_exits_zero(self, tmp_path, capsys):
        path = write_config(tmp_path, TOY_LINES, tmp_path / "out")
        assert main(["solve", path]) == 0
        assert "converged" in capsys.readouterr().out

    def test_unconverged_solve_exits_two(self, tmp_path):
        body = TOY_LINES.replace("stop.max_iters = 200", "stop.max_iters = 0")
        path = write_config(tmp_path, body, tmp_path / "out")
        assert main(["solve", path]) == 2

    def test_config_error_exits_one(self, tmp_path, capsys):
        path = write_config(tmp_path, TOY_LINES, tmp_path, extra="mystery = 1\n")
        assert main(["solve", path]) == 1
        assert "mystery" in capsys.readouterr().err

    def test_missing_file_exits_one(self, tmp_path):
        assert main(["solve", str(tmp_path / "absent.cfg")]) == 1

    def test_usage_error_exits_one(self, capsys):
        assert main(["no-such-command"]) == 1
        capsys.readouterr()

    def test_diagnose_prints_two_columns(self, tmp_path, capsys):
        config_path = write_config(
            tmp_path, TOY_LINES, tmp_path / "out", extra="diagnose.count = 3\n")
        lines = ["x,u"]
        for j in range(16):
            lines.append("%g,%g" % (-8.0 + j, 1.0 if j == 8 else 0.0))
        profile = tmp_path / "impulse.csv"
        profile.write_text("\n".join(lines) + "\n")
        assert main(["diagnose", config_path, str(profile)]) == 0
        out = capsys.readouterr().out.strip().split("\n")
        assert out[0].split() == ["plain", "stabilized"]
        assert len(out) == 4

    def test_selftest_passes(self, capsys):
        assert selftest() == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert len(lines) == 5
        assert all(line.startswith("ok") for line in lines)
