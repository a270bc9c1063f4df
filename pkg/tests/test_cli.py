"""Command-line interface: config parsing, the exit-code contract, output
artifacts and run determinism."""

import json

import numpy as np
import pytest

from dnslab import cli, diagnostics, grid as g


def write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def smooth_config(out_dir, n=64, t_end=0.02):
    return {
        "params": {"gamma": 2.0, "delta": 1.5, "alpha": 1.0, "beta": 0.0,
                   "rho_bar": 1.0},
        "grid": {"dim": 1, "n": n, "length": 1.0, "boundary": "periodic"},
        "init": {"kind": "smooth", "rho_amplitude": 0.05, "rho_width": 0.1,
                 "u_amplitude": 0.05, "u_width": 0.1},
        "picard": {"dt": 1e-3, "t_end": t_end, "eta_schedule": [1e-3],
                   "picard_tol": 1e-9},
        "output": {"dir": out_dir, "diagnostics_every": 5,
                   "snapshot_every": 10},
    }


def vacuum_blowup_config(out_dir, n=128):
    return {
        "params": {"gamma": 2.0, "delta": 1.5, "rho_bar": 0.0},
        "grid": {"dim": 1, "n": n, "length": 4.0, "boundary": "far-field",
                 "origin": [-2.0]},
        "init": {"kind": "pure_vacuum",
                 "u0": {"kind": "radial", "scale": -1.0,
                        "profile": {"kind": "bump", "radius": 1.8}}},
        "picard": {"dt": 5e-3, "t_end": 10.0, "eta_schedule": [0.0],
                   "picard_tol": 1e-10},
        "output": {"dir": out_dir, "diagnostics_every": 10},
    }


class TestRun:
    def test_smooth_run_exits_zero_with_artifacts(self, tmp_path):
        out = tmp_path / "out"
        cfgp = write_config(tmp_path, smooth_config(str(out)))
        assert cli.main(["run", "--config", cfgp, "--quiet"]) == 0
        for fname in ("diagnostics.csv", "bounds.csv", "contraction.csv",
                      "eta_gaps.csv", "config.json"):
            assert (out / fname).exists(), fname
        recs = diagnostics.read_csv(out / "diagnostics.csv")
        assert len(recs) == 4  # 20 ticks, every 5
        assert recs[-1].mass_drift < 1e-5

    def test_snapshots_written_and_readable(self, tmp_path):
        out = tmp_path / "out"
        cfgp = write_config(tmp_path, smooth_config(str(out)))
        cli.main(["run", "--config", cfgp, "--quiet"])
        snaps = sorted(out.glob("phi_*.dnsf"))
        assert len(snaps) == 2
        data, meta = g.read_snapshot(snaps[-1])
        assert meta["n"] == (64,)
        assert meta["time"] == pytest.approx(0.02)

    def test_runs_are_byte_deterministic(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        cfgp_a = write_config(tmp_path, smooth_config(str(out_a)), "a.json")
        cfgp_b = write_config(tmp_path, smooth_config(str(out_b)), "b.json")
        assert cli.main(["run", "--config", cfgp_a, "--quiet"]) == 0
        assert cli.main(["run", "--config", cfgp_b, "--quiet"]) == 0
        assert (out_a / "diagnostics.csv").read_bytes() == \
            (out_b / "diagnostics.csv").read_bytes()
        assert (out_a / "contraction.csv").read_bytes() == \
            (out_b / "contraction.csv").read_bytes()

    def test_blowup_exits_three(self, tmp_path, capsys):
        out = tmp_path / "out"
        cfgp = write_config(tmp_path, vacuum_blowup_config(str(out)))
        code = cli.main(["run", "--config", cfgp, "--quiet"])
        assert code == 3
        captured = capsys.readouterr()
        assert "suspected blow-up" in captured.out
        assert (out / "diagnostics.csv").exists()


class TestConfigErrors:
    def test_missing_file_exits_one(self, tmp_path, capsys):
        assert cli.main(["run", "--config", str(tmp_path / "nope.json")]) == 1
        assert "config error" in capsys.readouterr().err

    def test_malformed_json_reports_position(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{"params": {,}}')
        assert cli.main(["run", "--config", str(path)]) == 1
        assert "line 1" in capsys.readouterr().err

    def test_inadmissible_params_exit_one(self, tmp_path, capsys):
        cfg = smooth_config(str(tmp_path / "out"))
        cfg["params"]["gamma"] = 0.5
        cfgp = write_config(tmp_path, cfg)
        assert cli.main(["run", "--config", cfgp]) == 1
        assert "gamma" in capsys.readouterr().err

    def test_unknown_init_kind(self, tmp_path, capsys):
        cfg = smooth_config(str(tmp_path / "out"))
        cfg["init"] = {"kind": "mystery"}
        cfgp = write_config(tmp_path, cfg)
        assert cli.main(["run", "--config", cfgp]) == 1


class TestCheck:
    def test_valid_config_reports_ok(self, tmp_path, capsys):
        cfgp = write_config(tmp_path, smooth_config(str(tmp_path / "out")))
        assert cli.main(["check", "--config", cfgp]) == 0
        out = capsys.readouterr().out
        assert "params: ok" in out
        assert "init: ok" in out

    def test_region_summary_for_mass_group(self, tmp_path, capsys):
        cfg = {
            "params": {"gamma": 1.4, "delta": 1.2, "rho_bar": 0.0},
            "grid": {"dim": 1, "n": 128, "length": 4.0,
                     "boundary": "far-field", "origin": [-2.0]},
            "init": {"kind": "isolated_mass_group", "center": [0.0],
                     "r_inner": 0.8, "r_outer": 1.5, "amplitude": 1.0},
        }
        cfgp = write_config(tmp_path, cfg)
        assert cli.main(["check", "--config", cfgp]) == 0
        assert "|A0|" in capsys.readouterr().out


class TestVacuumPredict:
    def test_linear_compression_prints_exact_time(self, tmp_path, capsys):
        cfg = {
            "params": {"gamma": 2.0, "delta": 1.5, "rho_bar": 0.0},
            "grid": {"dim": 1, "n": 64, "length": 2.0,
                     "boundary": "far-field", "origin": [-1.0]},
            "init": {"kind": "pure_vacuum",
                     "u0": {"kind": "linear", "matrix": [[-1.0]]}},
        }
        cfgp = write_config(tmp_path, cfg)
        assert cli.main(["vacuum-predict", "--config", cfgp]) == 0
        out = capsys.readouterr().out
        assert "predicted_time: 1" in out
        assert "min eigenvalue: -1" in out

    def test_rotation_predicts_infinity(self, tmp_path, capsys):
        cfg = {
            "params": {"gamma": 2.0, "delta": 1.5, "rho_bar": 0.0},
            "grid": {"dim": 2, "n": 32, "length": 2.0,
                     "boundary": "far-field", "origin": [-1.0, -1.0]},
            "init": {"kind": "pure_vacuum",
                     "u0": {"kind": "rotation", "omega": 1.0}},
        }
        cfgp = write_config(tmp_path, cfg)
        assert cli.main(["vacuum-predict", "--config", cfgp]) == 0
        assert "infinity" in capsys.readouterr().out

    def test_wrong_init_kind_exits_one(self, tmp_path, capsys):
        cfgp = write_config(tmp_path, smooth_config(str(tmp_path / "out")))
        assert cli.main(["vacuum-predict", "--config", cfgp]) == 1


class TestEtaSweep:
    def test_writes_gap_table(self, tmp_path, capsys):
        out = tmp_path / "out"
        cfg = smooth_config(str(out), t_end=0.01)
        cfg["picard"]["eta_schedule"] = [1e-2, 1e-3, 1e-4]
        cfgp = write_config(tmp_path, cfg)
        assert cli.main(["eta-sweep", "--config", cfgp, "--quiet"]) == 0
        lines = (out / "eta_gaps.csv").read_text().strip().splitlines()
        assert lines[0] == "eta_a,eta_b,sup_l2_gap"
        assert len(lines) == 3

    def test_short_schedule_rejected(self, tmp_path):
        cfgp = write_config(tmp_path, smooth_config(str(tmp_path / "out")))
        assert cli.main(["eta-sweep", "--config", cfgp]) == 1


class TestBlowupScan:
    def test_scan_writes_admissible_grid(self, tmp_path, capsys):
        out = tmp_path / "out"
        cfg = {
            "params": {"gamma": 1.4, "delta": 1.2, "alpha": 1.0,
                       "beta": 0.0, "rho_bar": 0.0},
            "grid": {"dim": 1, "n": 128, "length": 4.0,
                     "boundary": "far-field", "origin": [-2.0]},
            "init": {"kind": "isolated_mass_group", "center": [0.0],
                     "r_inner": 0.8, "r_outer": 1.5, "amplitude": 1.0},
            "output": {"dir": str(out)},
        }
        cfgp = write_config(tmp_path, cfg)
        assert cli.main(["blowup-scan", "--config", cfgp, "--points", "4",
                         "--quiet"]) == 0
        lines = (out / "blowup_scan.csv").read_text().strip().splitlines()
        assert lines[0] == "gamma,delta,analytic_crossing_time,abort_time"
        rows = [line.split(",") for line in lines[1:]]
        assert len(rows) > 0
        # every admissible sampled point has a finite analytic crossing
        assert all(np.isfinite(float(r[2])) for r in rows)
