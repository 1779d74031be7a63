import math

import numpy as np
import pytest

from floquet_sb import cli
from floquet_sb.errors import ConfigError


def run(args):
    return cli.main(args)


def read_csv(path):
    with open(path) as fh:
        comment = fh.readline()
    data = np.genfromtxt(path, delimiter=",", names=True, skip_header=1)
    return comment, data


FAST_SIM = [
    "--t_max", "4.0", "--n_points", "41", "--columns", "sz",
    "--frame", "rotating",
]


class TestConfig:
    def test_defaults_and_overrides(self):
        cfg = cli.load_config("fig1b", None, ["--omegaL", "12.5"])
        assert cfg["omegaL"] == 12.5
        assert cfg["ratio2"] == pytest.approx(2.404826)

    def test_file_parsing(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("omegaL = 15 # comment\n\n# full-line comment\nbeta=0.5\n")
        cfg = cli.load_config("fig1b", str(path), [])
        assert cfg["omegaL"] == 15.0 and cfg["beta"] == 0.5

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown config key"):
            cli.load_config("fig1b", None, ["--bogus", "1"])

    def test_bad_value(self):
        with pytest.raises(ConfigError):
            cli.load_config("fig1b", None, ["--omegaL", "fast"])

    def test_grid_validation(self):
        with pytest.raises(ConfigError):
            cli.load_config("simulate", None, ["--t_max", "-1"])

    def test_initial_state_tags(self):
        cfg = cli.load_config("simulate", None,
                              ["--initial_state", "bloch:0.1,0.2,0.3"])
        assert cfg["initial_state"] == "bloch:0.1,0.2,0.3"
        with pytest.raises(ConfigError):
            cli.load_config("simulate", None, ["--initial_state", "sideways"])
        with pytest.raises(ConfigError):
            cli.load_config("simulate", None, ["--initial_state", "bloch:2,0,0"])

    def test_config_hash_stable(self):
        cfg1 = cli.load_config("fig1b", None, [])
        cfg2 = cli.load_config("fig1b", None, [])
        assert cli.config_hash(cfg1, "fig1b") == cli.config_hash(cfg2, "fig1b")
        cfg3 = cli.load_config("fig1b", None, ["--omegaL", "11"])
        assert cli.config_hash(cfg1, "fig1b") != cli.config_hash(cfg3, "fig1b")


class TestExitCodes:
    def test_config_error_is_2(self, tmp_path, capsys):
        rc = run(["simulate", "--out", str(tmp_path / "x.csv"), "--bogus", "1"])
        assert rc == 2
        assert "config error" in capsys.readouterr().err

    def test_truncation_error_is_4(self, tmp_path, capsys):
        rc = run([
            "simulate", "--out", str(tmp_path / "x.csv"),
            "--mode", "discrete", "--fock_cutoff", "1", "--beta", "0.5",
            "--t_max", "2.0", "--n_points", "5",
        ])
        assert rc == 4
        assert "truncation" in capsys.readouterr().err

    def test_success_is_0(self, tmp_path):
        assert run(["simulate", "--out", str(tmp_path / "x.csv")] + FAST_SIM) == 0


class TestCsvContract:
    def test_header_and_determinism(self, tmp_path):
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        run(["simulate", "--out", str(p1)] + FAST_SIM)
        run(["simulate", "--out", str(p2)] + FAST_SIM)
        assert p1.read_bytes() == p2.read_bytes()
        first = p1.read_text().splitlines()[0]
        parts = first.split()
        assert parts[0] == "#" and parts[1] == "floquet-sb"
        assert parts[3] == "simulate" and len(parts[4]) == 12

    def test_twelve_significant_digits(self, tmp_path):
        path = tmp_path / "x.csv"
        run(["simulate", "--out", str(path)] + FAST_SIM)
        line = path.read_text().splitlines()[2]
        for field in line.split(","):
            mantissa = field.split("e")[0]
            assert len(mantissa.split(".")[1]) >= 12


class TestSimulateCommand:
    def test_undriven_dephasing_keeps_population(self, tmp_path):
        path = tmp_path / "x.csv"
        rc = run([
            "simulate", "--out", str(path), "--amplitude_ratio", "0",
            "--columns", "sz,sy", "--frame", "rotating",
            "--t_max", "5.0", "--n_points", "26", "--initial_state", "minus_y",
        ])
        assert rc == 0
        _, data = read_csv(path)
        assert np.max(np.abs(data["sz"])) < 1e-10  # populations frozen
        assert abs(data["sy"][-1]) < abs(data["sy"][0])  # coherence decays

    def test_decoupling_point_population_survives(self, tmp_path):
        path = tmp_path / "x.csv"
        rc = run([
            "simulate", "--out", str(path), "--initial_state", "plus_z",
            "--t_max", "30.0", "--n_points", "151",
        ] + ["--columns", "sz", "--frame", "rotating"])
        assert rc == 0
        _, data = read_csv(path)
        assert data["sz"][-1] > 0.8  # no relaxation at the Bessel zero

    def test_discrete_mode_with_occupations(self, tmp_path):
        path = tmp_path / "x.csv"
        rc = run([
            "simulate", "--out", str(path), "--mode", "discrete",
            "--columns", "sz,occ", "--zero_temperature", "true",
            "--fock_cutoff", "5", "--t_max", "2.0", "--n_points", "9",
            "--steps_per_period", "100", "--frame", "rotating",
        ])
        assert rc == 0
        _, data = read_csv(path)
        assert set(data.dtype.names) == {"time", "sz", "occ_1", "occ_2"}
        assert np.all(data["occ_1"] >= -1e-12)

    def test_continuum_vs_discrete_consistency(self, tmp_path):
        # same discrete bath through both the closed form and the brute force
        p = tmp_path / "disc.csv"
        args = [
            "--amplitude_ratio", "2.404826", "--omegaL", "20",
            "--zero_temperature", "true", "--t_max", "1.2566370614359172",
            "--n_points", "5", "--frame", "rotating",
            "--initial_state", "plus_z",
        ]
        rc = run(["simulate", "--out", str(p), "--mode", "discrete",
                  "--columns", "sz", "--fock_cutoff", "6",
                  "--steps_per_period", "200"] + args)
        assert rc == 0
        _, disc = read_csv(p)
        # closed form on the identical mode list
        from floquet_sb.model import DriveConfig, ThermalParams
        from floquet_sb.reduced_dynamics import expectation, plus_z_state, rho_s
        from floquet_sb.floquet_core import PAULI_Z
        cfg = cli.load_config("simulate", None, ["--mode", "discrete"] + args)
        bath, _ = cli._fig2_bath(cfg)
        drive = DriveConfig.from_ratio(1.0, 2.404826, 20.0)
        th = ThermalParams(zero_temperature=True)
        for t, sz_disc in zip(disc["time"], disc["sz"]):
            sz_cf = expectation(rho_s(float(t), plus_z_state(), drive, bath, th),
                                PAULI_Z)
            assert sz_disc == pytest.approx(sz_cf, abs=5e-3)


class TestFigureCommands:
    def test_fig1d_structure(self, tmp_path):
        path = tmp_path / "fig1d.csv"
        rc = run(["fig1d", "--out", str(path), "--t_max", "2.0",
                  "--n_points", "41"])
        assert rc == 0
        _, data = read_csv(path)
        assert data.dtype.names == ("time", "sz_rot_10", "sz_rot_15",
                                    "sz_rot_20", "sz_rot_inf")
        assert np.max(np.abs(data["sz_rot_inf"] - 1.0)) < 1e-12
        for col in ("sz_rot_10", "sz_rot_15", "sz_rot_20"):
            assert data[col][0] == pytest.approx(1.0, abs=1e-12)

    def test_fig1c_row_count_and_flat_zero_row(self, tmp_path):
        path = tmp_path / "fig1c.csv"
        rc = run(["fig1c", "--out", str(path), "--n_ratios", "3",
                  "--t_max", "15.0", "--n_points", "481"])
        assert rc == 0
        _, data = read_csv(path)
        assert data.shape[0] == 3 * 481
        row0 = data["envelope"][data["ratio"] == 0.0]
        # A = 0 freezes sigma_z at zero for the |->_y initial state
        assert np.max(np.abs(row0)) < 1e-10

    def test_fig1b_initial_row(self, tmp_path):
        path = tmp_path / "fig1b.csv"
        rc = run(["fig1b", "--out", str(path), "--t_max", "3.0",
                  "--n_points", "121"])
        assert rc == 0
        _, data = read_csv(path)
        assert data["sz_lab_ratio1"][0] == pytest.approx(0.0, abs=1e-12)
        assert data["sz_lab_ratio2"][0] == pytest.approx(0.0, abs=1e-12)

    def test_fig2_dot_series_structure(self, tmp_path):
        path = tmp_path / "fig2.csv"
        rc = run([
            "fig2", "--out", str(path), "--n_periods", "2",
            "--steps_per_period", "100", "--points_per_period", "20",
            "--n_tau", "4", "--zero_temperature", "true",
            "--fock_cutoff", "4",
        ])
        assert rc == 0
        _, data = read_csv(path)
        period = 2 * math.pi / 11.0
        for i, col in enumerate(
            n for n in data.dtype.names if n.startswith("sz_strob")
        ):
            vals = data[col]
            mask = ~np.isnan(vals)
            assert mask.sum() == 3  # n = 0, 1, 2
            tau = data["time"][mask][0]
            expected = tau + period * np.arange(3)
            assert np.allclose(data["time"][mask], expected, atol=1e-9)
        dens = tmp_path / "fig2_density.csv"
        _, density = read_csv(dens)
        assert density.shape[0] == 4 * 3
        assert density.dtype.names == ("tau", "time", "value")

    def test_fig2_dots_near_driven_curve(self, tmp_path):
        path = tmp_path / "fig2.csv"
        rc = run([
            "fig2", "--out", str(path), "--n_periods", "3",
            "--steps_per_period", "120", "--points_per_period", "24",
            "--n_tau", "4", "--zero_temperature", "true",
            "--fock_cutoff", "5",
        ])
        assert rc == 0
        _, data = read_csv(path)
        for col in (n for n in data.dtype.names if n.startswith("sz_strob")):
            mask = ~np.isnan(data[col])
            assert np.max(np.abs(data[col][mask] - data["sz_driven"][mask])) < 0.05


class TestToleranceExit:
    def test_tolerance_error_is_3(self, tmp_path, capsys, monkeypatch):
        from floquet_sb.errors import ToleranceError

        def boom(cfg, out):
            raise ToleranceError("synthetic quadrature failure")

        monkeypatch.setitem(cli._COMMANDS, "simulate", boom)
        rc = run(["simulate", "--out", str(tmp_path / "x.csv")])
        assert rc == 3
        assert "tolerance" in capsys.readouterr().err


class TestParallelSweep:
    def test_thread_cap_respected_and_deterministic(self, tmp_path, monkeypatch):
        args = ["fig1c", "--n_ratios", "2", "--t_max", "8.0",
                "--n_points", "261"]
        serial, parallel = tmp_path / "s.csv", tmp_path / "p.csv"
        monkeypatch.setenv("FLOQUET_SB_THREADS", "1")
        assert run(args + ["--out", str(serial)]) == 0
        monkeypatch.setenv("FLOQUET_SB_THREADS", "2")
        assert run(args + ["--out", str(parallel)]) == 0
        assert serial.read_bytes() == parallel.read_bytes()
