"""Command-line interface: exit codes, output files, and reproducibility.

All invocations go through main(argv) in-process; a small 4x4 grid keeps
the thermal warm-up cheap.
"""

import csv
import json

import pytest

from meltpool_rl.cli import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION, main

SMALL = """\
grid:
  n: 4
qlearn:
  episodes: 10
  n_epochs: 10
  seed: 3
"""


@pytest.fixture()
def small_config(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(SMALL)
    return str(path)


class TestDepth:
    def test_known_point(self, capsys):
        assert main(["depth", "--power", "1000", "--speed", "400"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "converged=True" in out
        depth = float(out.split("depth_mm=")[1].split()[0])
        assert abs(depth - 1.26) < 0.1

    def test_zero_power(self, capsys):
        assert main(["depth", "--power", "0", "--speed", "500"]) == EXIT_OK
        assert "depth_mm=0.0000" in capsys.readouterr().out

    def test_negative_power_fails_validation(self, capsys):
        assert main(["depth", "--power", "-5", "--speed", "500"]) == \
            EXIT_VALIDATION
        assert "--power" in capsys.readouterr().err

    def test_zero_speed_fails_validation(self):
        assert main(["depth", "--power", "500", "--speed", "0"]) == \
            EXIT_VALIDATION


class TestConfigHandling:
    def test_bad_config_path(self, capsys):
        rc = main(["--config", "/nonexistent.yaml", "depth",
                   "--power", "500", "--speed", "500"])
        assert rc == EXIT_VALIDATION
        assert "cannot read" in capsys.readouterr().err

    def test_invalid_config_value(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        bad.write_text("qlearn:\n  alpha: 2.0\n")
        rc = main(["--config", str(bad), "depth",
                   "--power", "500", "--speed", "500"])
        assert rc == EXIT_VALIDATION
        assert "alpha" in capsys.readouterr().err


class TestTrain:
    def test_writes_all_outputs(self, tmp_path, small_config, capsys):
        out = tmp_path / "run"
        rc = main(["--config", small_config, "train", "--out", str(out)])
        assert rc == EXIT_OK
        for name in ("config_snapshot.json", "qtable.csv", "qtable.json",
                     "convergence.csv", "summary.json"):
            assert (out / name).exists()
        summary = json.loads((out / "summary.json").read_text())
        assert set(summary) == {"best_power_w", "best_speed_mmpm",
                                "best_depth_mm", "oracle_rank", "seed",
                                "generator"}
        assert summary["seed"] == 3
        assert "best P=" in capsys.readouterr().out

    def test_seed_override_recorded(self, tmp_path, small_config):
        out = tmp_path / "run"
        main(["--config", small_config, "train", "--seed", "11",
              "--out", str(out)])
        summary = json.loads((out / "summary.json").read_text())
        snapshot = json.loads((out / "config_snapshot.json").read_text())
        assert summary["seed"] == 11
        assert snapshot["qlearn"]["seed"] == 11

    def test_reruns_are_byte_identical(self, tmp_path, small_config):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["--config", small_config, "train", "--out", str(out1)])
        main(["--config", small_config, "train", "--out", str(out2)])
        for name in ("qtable.csv", "convergence.csv", "summary.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_jobs_does_not_change_results(self, tmp_path, small_config):
        out1, out2 = tmp_path / "j1", tmp_path / "j2"
        main(["--config", small_config, "--jobs", "1", "train",
              "--out", str(out1)])
        main(["--config", small_config, "--jobs", "2", "train",
              "--out", str(out2)])
        assert (out1 / "qtable.csv").read_bytes() == \
            (out2 / "qtable.csv").read_bytes()


class TestMap:
    def test_writes_oracle_maps(self, tmp_path, small_config, capsys):
        out = tmp_path / "map"
        rc = main(["--config", small_config, "map", "--out", str(out)])
        assert rc == EXIT_OK
        with open(out / "pv_map.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 16
        with open(out / "depth_map.csv", newline="") as fh:
            assert len(list(csv.DictReader(fh))) == 16
        assert "rank-1 state" in capsys.readouterr().out


class TestSweep:
    def test_unknown_parameter_rejected(self, tmp_path, small_config, capsys):
        rc = main(["--config", small_config, "sweep", "--param", "beta",
                   "--out", str(tmp_path / "s")])
        assert rc == EXIT_VALIDATION
        assert "beta" in capsys.readouterr().err

    def test_writes_summary_and_per_value_dirs(self, tmp_path):
        cfg = tmp_path / "config.yaml"
        cfg.write_text(SMALL + """\
sweep:
  param: episodes
  values: [3, 5]
  replicates: 2
""")
        out = tmp_path / "sweep"
        rc = main(["--config", str(cfg), "sweep", "--param", "episodes",
                   "--out", str(out)])
        assert rc == EXIT_OK
        with open(out / "summary.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 4  # 2 values x 2 replicates
        for value, episodes in (("3", 3), ("5", 5)):
            vdir = out / f"episodes_{value}"
            meta = json.loads((vdir / "config.json").read_text())
            assert meta["band"] == "across-replicate std"
            assert len(meta["seeds"]) == 2
            with open(vdir / "convergence.csv", newline="") as fh:
                assert len(list(csv.DictReader(fh))) == episodes
            assert (vdir / "run_0_qtable.csv").exists()
            assert (vdir / "run_1_convergence.csv").exists()
