import json
import subprocess
import sys

import numpy as np
import pytest

import nhlattice as nh
from nhlattice import ConfigError, Experiment, FitModel
from nhlattice.harness import config_from_dict, run

PI_HALF = float(np.pi / 2)

EXPECTED_PRESETS = ["fig2", "fig3a", "fig3b", "fig4", "fig6", "fig7a", "fig7b",
                    "fig7c", "fig7d", "fig7e", "fig7f", "fig8a", "fig8b",
                    "fig8c", "fig8d"]


def small_absorption_config(out=None):
    return {
        "experiment": "absorption",
        "lattice": {"kappa": 1.0, "g": 1.0, "gamma": -0.5, "n_sites": 200,
                    "topology": "folded"},
        "packet": {"alpha": 0.08, "k": PI_HALF, "center": 101},
        "options": {"t_final": 120.0, "snapshot_times": [60.0]},
        "output_dir": out,
        "seed": 0,
    }


class TestFitScaling:
    def test_linear_exact(self):
        xs = np.array([1.0, 2.0, 3.0, 4.0])
        fit = nh.fit_scaling(xs, 2.0 * xs, FitModel.LINEAR)
        assert fit.coefficients[1] == pytest.approx(2.0)
        assert fit.coefficients[0] == pytest.approx(0.0, abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0)

    def test_quadratic_exact(self):
        xs = np.array([1.0, 2.0, 3.0, 5.0])
        fit = nh.fit_scaling(xs, xs ** 2, FitModel.QUADRATIC)
        assert fit.coefficients[2] == pytest.approx(1.0)
        assert fit.r_squared == pytest.approx(1.0)

    def test_power_law_exact(self):
        xs = np.array([0.5, 1.0, 2.0, 4.0])
        fit = nh.fit_scaling(xs, 3.0 * xs ** 2.0, FitModel.POWER_LAW)
        assert fit.coefficients[0] == pytest.approx(3.0)
        assert fit.coefficients[1] == pytest.approx(2.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            nh.fit_scaling([1.0, 2.0], [1.0, 2.0], FitModel.LINEAR)
        with pytest.raises(ValueError):
            nh.fit_scaling([1.0, 1.0, 2.0], [1.0, 2.0, 3.0], FitModel.LINEAR)
        with pytest.raises(ValueError):
            nh.fit_scaling([1.0, 2.0, 3.0], [1.0, -2.0, 3.0], FitModel.POWER_LAW)


class TestConfigValidation:
    def test_missing_experiment(self):
        with pytest.raises(ConfigError, match="experiment"):
            config_from_dict({"lattice": {}})

    def test_unknown_experiment(self):
        with pytest.raises(ConfigError, match="unknown experiment"):
            config_from_dict({"experiment": "nope", "lattice": {}})

    def test_bad_lattice_field(self):
        cfg = small_absorption_config()
        cfg["lattice"]["kappa"] = -1.0
        with pytest.raises(ConfigError, match="lattice"):
            config_from_dict(cfg)

    def test_sweep_parameter_must_exist(self):
        cfg = small_absorption_config()
        cfg["sweep"] = {"parameter": "frobnicate", "values": [1.0]}
        with pytest.raises(ConfigError, match="frobnicate"):
            config_from_dict(cfg)

    def test_sweep_values_finite(self):
        cfg = small_absorption_config()
        cfg["sweep"] = {"parameter": "alpha", "values": [float("inf")]}
        with pytest.raises(ConfigError, match="finite"):
            config_from_dict(cfg)

    def test_all_presets_load(self):
        assert nh.preset_names() == EXPECTED_PRESETS
        for name in EXPECTED_PRESETS:
            config = nh.load_preset(name)
            assert isinstance(config.experiment, Experiment)


class TestRunOutputs:
    def test_absorption_outputs(self, tmp_path):
        config = config_from_dict(small_absorption_config())
        summary = run(config, out=str(tmp_path))
        for name in ("trace.csv", "snapshots.csv", "summary.json", "manifest.json"):
            assert (tmp_path / name).exists()
        trace = (tmp_path / "trace.csv").read_text().splitlines()
        assert trace[0] == "# schema=1"
        assert trace[1] == "t,P_total,event"
        assert summary["residual"] < 0.05
        snap = (tmp_path / "snapshots.csv").read_text().splitlines()
        assert snap[1] == "t,j,P"
        assert len(snap) == 2 + 201         # one snapshot, one row per site

    def test_determinism(self, tmp_path):
        config = config_from_dict(small_absorption_config())
        run(config, out=str(tmp_path / "a"))
        run(config, out=str(tmp_path / "b"))
        for name in ("trace.csv", "snapshots.csv", "summary.json"):
            assert (tmp_path / "a" / name).read_bytes() == \
                (tmp_path / "b" / name).read_bytes()

    def test_manifest_roundtrip(self, tmp_path):
        config = config_from_dict(small_absorption_config())
        run(config, out=str(tmp_path / "a"))
        replay = nh.load_config(tmp_path / "a" / "manifest.json")
        run(replay, out=str(tmp_path / "b"))
        assert (tmp_path / "a" / "trace.csv").read_bytes() == \
            (tmp_path / "b" / "trace.csv").read_bytes()

    def test_scatter_csv_columns(self, tmp_path):
        cfg = {
            "experiment": "scatter",
            "lattice": {"kappa": 1.0, "g": 1.0, "gamma": 0.3, "n_sites": 100,
                        "topology": "side_coupled"},
            "options": {"k_points": 21},
            "seed": 0,
        }
        run(config_from_dict(cfg), out=str(tmp_path))
        lines = (tmp_path / "scatter.csv").read_text().splitlines()
        assert lines[0] == "# schema=1"
        assert lines[1] == "k,re_r,im_r,re_t,im_t,R,divergent_flag"
        assert len(lines) == 2 + 21
        k, re_r, im_r, re_t, im_t, big_r, flag = lines[5].split(",")
        assert float(re_t) == pytest.approx(float(re_r) + 1.0, rel=1e-12)
        assert flag in ("0", "1")

    def test_scatter_divergent_flagged(self, tmp_path):
        cfg = {
            "experiment": "scatter",
            "lattice": {"kappa": 1.0, "g": 1.0, "gamma": 0.5, "n_sites": 100,
                        "topology": "side_coupled"},
            "options": {"k_points": 3, "k_min": PI_HALF, "k_max": PI_HALF + 0.2},
            "seed": 0,
        }
        run(config_from_dict(cfg), out=str(tmp_path))
        lines = (tmp_path / "scatter.csv").read_text().splitlines()
        assert lines[2].endswith(",1")      # k = pi/2 at critical gain
        assert lines[3].endswith(",0")

    def test_spectrum_output(self, tmp_path):
        cfg = {
            "experiment": "spectrum",
            "lattice": {"kappa": 1.0, "g": 1.0, "gamma": 0.5, "n_sites": 40,
                        "topology": "pt"},
            "seed": 0,
        }
        payload = run(config_from_dict(cfg), out=str(tmp_path))
        assert payload["ep_verdict"] == "ep2"
        assert abs(payload["overlap"]["re"]) < 1e-8
        assert payload["ep_detect"]["algebraic_multiplicity"] == 2
        assert payload["ep_detect"]["geometric_multiplicity"] == 1
        assert len(payload["eigenvalues"]) == 42
        assert (tmp_path / "eigenvalues.csv").exists()

    def test_scaling_sweep_parallel(self, tmp_path):
        cfg = {
            "experiment": "scaling_sweep",
            "lattice": {"kappa": 1.0, "g": 1.0, "gamma": 0.5, "n_sites": 260,
                        "topology": "folded"},
            "packet": {"alpha": 0.06, "k": PI_HALF, "center": 131},
            "sweep": {"parameter": "alpha", "values": [0.06, 0.09, 0.12]},
            "options": {"t_final": 180.0},
            "seed": 0,
        }
        summary = run(config_from_dict(cfg), out=str(tmp_path), workers=2)
        assert summary["fit_model"] == "linear"
        assert summary["fit_r_squared"] > 0.999
        for i in range(3):
            assert (tmp_path / f"point_{i:03d}" / "summary.json").exists()
        assert (tmp_path / "sweep.csv").exists()
        assert (tmp_path / "manifest.json").exists()

    def test_deviation_outputs(self, tmp_path):
        cfg = {
            "experiment": "deviation",
            "lattice": {"kappa": 1.0, "g": 1.0, "gamma": 0.5, "n_sites": 100,
                        "topology": "pt"},
            "options": {"deltas": [-1e-3, 0.0, 1e-3]},
            "seed": 0,
        }
        summary = run(config_from_dict(cfg), out=str(tmp_path))
        kinds = [r["classification"] for r in summary["rows"]]
        assert kinds == ["oscillatory", "quadratic", "exponential"]
        lines = (tmp_path / "deviation.csv").read_text().splitlines()
        assert lines[1] == "delta,gamma,P,difference,residual,classification"


class TestCLI:
    def _cli(self, *args):
        return subprocess.run([sys.executable, "-m", "nhlattice.cli", *args],
                              capture_output=True, text=True)

    def test_missing_config_is_exit_2(self):
        r = self._cli("run", "--config", "/does/not/exist.json")
        assert r.returncode == 2

    def test_family_mismatch_is_exit_2(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(small_absorption_config()))
        r = self._cli("scatter", "--config", str(cfg))
        assert r.returncode == 2

    def test_numerical_failure_is_exit_3(self, tmp_path):
        bad = {
            "experiment": "emission",
            "lattice": {"kappa": 1.0, "g": 1.0, "gamma": 0.5, "n_sites": 800,
                        "topology": "folded"},
            "packet": {"alpha": 0.02, "k": PI_HALF, "center": 401},
            "options": {"t_final": 100.0},
            "seed": 0,
        }
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(bad))
        r = self._cli("evolve", "--config", str(cfg), "--out", str(tmp_path / "o"))
        assert r.returncode == 3

    def test_successful_run_exit_0(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(small_absorption_config()))
        r = self._cli("evolve", "--config", str(cfg), "--out", str(tmp_path / "o"))
        assert r.returncode == 0
        assert "residual" in r.stdout

    def test_list_presets(self):
        r = self._cli("--list-presets")
        assert r.returncode == 0
        assert r.stdout.split() == EXPECTED_PRESETS

    def test_env_var_output_root(self, tmp_path, monkeypatch):
        import os
        cfg_path = tmp_path / "c.json"
        cfg_path.write_text(json.dumps(small_absorption_config()))
        env = dict(os.environ, NHLATTICE_OUT=str(tmp_path / "root"))
        r = subprocess.run([sys.executable, "-m", "nhlattice.cli", "evolve",
                            "--config", str(cfg_path)],
                           capture_output=True, text=True, env=env)
        assert r.returncode == 0
        assert (tmp_path / "root" / "absorption" / "trace.csv").exists()
