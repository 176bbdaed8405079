"""End-to-end CLI runs: determinism, exit codes, report formats."""

import json
import math

from gaplab.cli import main


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg, indent=2))
    return str(path)


def run_cli(tmp_path, cfg, *extra):
    cfg_path = write_config(tmp_path, cfg)
    out_dir = tmp_path / "out"
    return main(["--config", cfg_path, "--out", str(out_dir), *extra]), out_dir


MARGULIS_SMALL = {
    "experiment": "margulis-demo",
    "params": {"N": 128, "seed": 7},
    "output": {"prefix": "demo_"},
}


class TestMargulisDemo:
    def test_exit_zero_and_violation_reported(self, tmp_path, capsys):
        code, out_dir = run_cli(tmp_path, MARGULIS_SMALL)
        assert code == 0
        summary = (out_dir / "demo_summary.txt").read_text()
        assert "inequality not asserted (hypothesis violation" in summary
        assert "orbit covers the space" in summary
        record = dict(
            line.split(",", 1)
            for line in (out_dir / "demo_record.csv").read_text().splitlines()[1:]
        )
        assert float(record["max_nonzero_character"]) <= 1e-10
        assert float(record["discrepancy"]) <= 1e-8
        assert record["regular_norm"] == "1"


class TestVerifyBound:
    def test_torus_flow_passes(self, tmp_path):
        cfg = {
            "experiment": "verify-bound",
            "group": {"kind": "real-grid", "dimension": 1, "resolution": 4},
            "measure": {"kind": "uniform-interval", "lo": -1, "hi": 1},
            "action": {"kind": "torus-translation", "N": 128, "step": [29, 41],
                       "slope_hint": math.sqrt(2)},
            "params": {"tol": 1e-3, "seed": 7,
                       "regular_norm_method": "amenable"},
        }
        code, out_dir = run_cli(tmp_path, cfg)
        assert code == 0
        record = (out_dir / "verify-bound_record.csv").read_text()
        assert "passed,true" in record

    def test_missing_grid_size_exit_two(self, tmp_path, capsys):
        cfg = {
            "experiment": "verify-bound",
            "group": {"kind": "lattice"},
            "measure": {"kind": "srw"},
            "action": {"kind": "torus-translation", "step": [1, 2]},
        }
        code, _ = run_cli(tmp_path, cfg)
        assert code == 2
        err = capsys.readouterr().err
        assert "action.N" in err

    def test_unknown_experiment_exit_two(self, tmp_path, capsys):
        code, _ = run_cli(tmp_path, {"experiment": "nope"})
        assert code == 2
        assert "experiment" in capsys.readouterr().err


class TestRegularNormExperiment:
    def test_berg_sequence_written(self, tmp_path):
        cfg = {
            "experiment": "regular-norm",
            "group": {"kind": "lattice", "dimension": 1},
            "measure": {"kind": "srw"},
            "params": {"method": "berg-christensen", "n_max": 20},
        }
        code, out_dir = run_cli(tmp_path, cfg)
        assert code == 0
        seq = (out_dir / "regular-norm_sequence.csv").read_text().splitlines()
        assert seq[0] == "n,value"
        assert len(seq) == 21

    def test_kv_format(self, tmp_path):
        cfg = {
            "experiment": "regular-norm",
            "group": {"kind": "lattice", "dimension": 1},
            "measure": {"kind": "srw"},
            "params": {"method": "amenable-mass"},
        }
        cfg_path = write_config(tmp_path, cfg)
        out_dir = tmp_path / "kvout"
        code = main(["--config", cfg_path, "--out", str(out_dir),
                     "--format", "kv"])
        assert code == 0
        text = (out_dir / "regular-norm_record.kv").read_text()
        assert "method = amenable-mass" in text
        assert "value = 1" in text


class TestDeterminism:
    def test_identical_configs_identical_records(self, tmp_path):
        cfg = {
            "experiment": "koopman-norm",
            "group": {"kind": "lattice", "dimension": 1},
            "measure": {"kind": "atoms",
                        "atoms": [[1, 0.5], [-1, 0.3], [2, 0.2]]},
            "action": {"kind": "circle-rotation", "N": 64, "cells_per_step": 11},
            "params": {"tol": 1e-8, "seed": 42},
        }
        bodies = []
        for sub in ("a", "b"):
            cfg_path = write_config(tmp_path, cfg, name=f"{sub}.json")
            out_dir = tmp_path / sub
            assert main(["--config", cfg_path, "--out", str(out_dir)]) == 0
            bodies.append((
                (out_dir / "koopman-norm_record.csv").read_bytes(),
                (out_dir / "koopman-norm_summary.txt").read_bytes(),
            ))
        assert bodies[0] == bodies[1]


class TestSweep:
    def test_berg_nmax_sweep_increases(self, tmp_path):
        cfg = {
            "experiment": "sweep",
            "template": {
                "experiment": "regular-norm",
                "group": {"kind": "lattice", "dimension": 1},
                "measure": {"kind": "srw"},
                "params": {"method": "berg-christensen"},
            },
            "grid": {"params.n_max": [10, 20, 40]},
        }
        code, out_dir = run_cli(tmp_path, cfg, "--jobs", "2")
        assert code == 0
        rows = (out_dir / "sweep_sequence.csv").read_text().splitlines()
        header = rows[0].split(",")
        vcol = header.index("value")
        values = [float(r.split(",")[vcol]) for r in rows[1:]]
        assert values == sorted(values)
        assert values[-1] < 1.0

    def test_empty_grid_is_single_child(self, tmp_path):
        cfg = {
            "experiment": "sweep",
            "template": {
                "experiment": "regular-norm",
                "group": {"kind": "lattice", "dimension": 1},
                "measure": {"kind": "srw"},
                "params": {"method": "amenable-mass"},
            },
        }
        code, out_dir = run_cli(tmp_path, cfg)
        assert code == 0
        assert (out_dir / "sweep_record.csv").exists()


class TestNetsExperiment:
    def test_small_battery(self, tmp_path):
        cfg = {
            "experiment": "nets",
            "params": {"count": 10, "seed": 3, "ratio_n_max": 6},
        }
        code, out_dir = run_cli(tmp_path, cfg)
        assert code == 0
        rows = (out_dir / "nets_sequence.csv").read_text().splitlines()
        assert len(rows) == 11


class TestCertificateExperiment:
    def test_small_torus(self, tmp_path):
        cfg = {
            "experiment": "certificate",
            "group": {"kind": "real-grid", "dimension": 1, "resolution": 2},
            "measure": {"kind": "uniform-interval", "lo": -1, "hi": 1},
            "action": {"kind": "torus-translation", "N": 128, "step": [29, 41]},
            "params": {"n_max": 6, "tol": 1e-3, "seed": 7},
        }
        code, out_dir = run_cli(tmp_path, cfg)
        assert code == 0
        record = (out_dir / "certificate_record.csv").read_text()
        assert "cond1_all,true" in record
        assert "cond2_all,true" in record
