import subprocess
import sys

import numpy as np
import pytest

from apinem.cli import EXIT_CONFIG, EXIT_FAILED_POINTS, EXIT_GUARD, main
from apinem.io import read_header, read_summary, read_table

from conftest import config_path

FAST = """
[beam]
beta = 0.7
sigma_z0 = 0.04um
L_D = {L_D}

[laser]
beta_lambda = 1.2um
{field}
L = 3um
phi0 = 0.5rad
{extra}
"""


def write_cfg(tmp_path, name="fast.ini", L_D="0m", field="upsilon = 0.1", extra=""):
    path = tmp_path / name
    path.write_text(FAST.format(L_D=L_D, field=field, extra=extra))
    return path


def run(cmd, cfg, out, *extra):
    return main([cmd, "--config", str(cfg), "--out", str(out), *extra])


@pytest.mark.parametrize(
    "name, label",
    [("fig3a_pinem", "PINEM"), ("fig3b_acceleration", "Acceleration"), ("fig3c_apinem", "APINEM")],
)
def test_predict_labels(tmp_path, name, label):
    assert run("predict", config_path(name), tmp_path) == 0
    assert read_summary(tmp_path / "predict.txt")["label"] == label


def test_predict_is_pure_and_zero_drift_has_equal_gammas(tmp_path):
    cfg = config_path("fig3b_acceleration")
    run("predict", cfg, tmp_path / "a")
    run("predict", cfg, tmp_path / "b")
    a = (tmp_path / "a" / "predict.txt").read_bytes()
    assert a == (tmp_path / "b" / "predict.txt").read_bytes()
    s = read_summary(tmp_path / "a" / "predict.txt")
    assert s["Gamma"] == s["Gamma0"]


def test_predict_and_simulate_agree(tmp_path):
    cfg = write_cfg(tmp_path, L_D="20cm")
    run("predict", cfg, tmp_path / "p")
    run("simulate", cfg, tmp_path / "s")
    p = read_summary(tmp_path / "p" / "predict.txt")
    s = read_summary(tmp_path / "s" / "summary.txt")
    for key in ("label", "Gamma", "Gamma0"):
        assert p[key] == s[key]


def test_simulate_deterministic_and_headers(tmp_path):
    cfg = write_cfg(tmp_path, extra="\n[run]\nwigner = true\nspectrum_axis = E\n")
    assert run("simulate", cfg, tmp_path / "a") == 0
    assert run("simulate", cfg, tmp_path / "b") == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert {"spectrum.txt", "spectrum_initial.txt", "summary.txt", "wigner.txt", "wigner_preview.txt"} <= set(files)
    for name in files:
        a = (tmp_path / "a" / name).read_bytes()
        assert a == (tmp_path / "b" / name).read_bytes()
        header = read_header(tmp_path / "a" / name)
        assert header[0].startswith("apinem ") and header[0].endswith(" simulate")
        assert "config beam.sigma_z0 = 4e-08" in header
        assert "config laser.phi0 = 0.5" in header
    names, _ = read_table(tmp_path / "a" / "spectrum.txt")
    assert names[0] == "E_J"


def test_zero_field_spectrum_equals_input(tmp_path):
    cfg = write_cfg(tmp_path, L_D="60cm", field="E0 = 0V/m")
    assert run("simulate", cfg, tmp_path) == 0
    _, a = read_table(tmp_path / "spectrum.txt")
    _, b = read_table(tmp_path / "spectrum_initial.txt")
    np.testing.assert_array_equal(a[:, 0], b[:, 0])
    dp = a[1, 0] - a[0, 0]
    assert np.abs(a[:, 1] - b[:, 1]).sum() * dp < 1e-10


def test_snapshots_written(tmp_path):
    cfg = write_cfg(tmp_path, extra="\n[run]\nsnapshots = 0fs, 5fs\n")
    assert run("simulate", cfg, tmp_path) == 0
    assert (tmp_path / "snapshot_000.txt").exists() and (tmp_path / "snapshot_001.txt").exists()


def test_bad_config_exit_code(tmp_path, capsys):
    cfg = write_cfg(tmp_path, field="upsilon = 0.1\nE0 = 1MV/m")
    assert run("predict", cfg, tmp_path) == EXIT_CONFIG
    assert "conflict" in capsys.readouterr().err


def test_guard_trip_exit_code(tmp_path, capsys):
    cfg = write_cfg(tmp_path, L_D="60cm", extra="\n[grid]\nN = 4096\nz_span = 6um\n")
    assert run("simulate", cfg, tmp_path) == EXIT_GUARD
    assert "AliasingError" in capsys.readouterr().err


def test_sweep_failed_point_sets_exit_code(tmp_path):
    cfg = write_cfg(tmp_path, L_D="0m")
    assert run("sweep", cfg, tmp_path) == EXIT_FAILED_POINTS
    assert read_summary(tmp_path / "summary.txt")["failed_points"] == "1"


def test_phase_diagram_outputs(tmp_path):
    assert run("phase-diagram", config_path("fig2_phase_diagram"), tmp_path) == 0
    for name in ("phase_diagram.txt", "contour_gamma_sqrt2.txt", "contour_gamma0_sqrt2.txt"):
        assert (tmp_path / name).exists()
    s = read_summary(tmp_path / "summary.txt")
    assert float(s["gamma_sqrt2_max_sigma_z0"]) == pytest.approx(1.2604e-7, rel=0.02)


def test_phase_diagram_line_scan(tmp_path):
    cfg = tmp_path / "line.ini"
    cfg.write_text("[beam]\nbeta = 0.7\n[diagram]\nsigma_min = 0.1um\nsigma_max = 0.1um\nn_sigma = 1\nn_L = 40\n")
    assert run("phase-diagram", cfg, tmp_path) == 0
    _, grid = read_table(tmp_path / "phase_diagram.txt")
    assert grid.shape == (40, 4)


def test_ensemble_seeded(tmp_path):
    cfg = write_cfg(tmp_path, extra="\n[ensemble]\nsigma_t_jitter = 0.5fs\nn_draws = 3\nsigma_E_part = 0.5eV\n")
    for seed, d in (("1", "a"), ("1", "b"), ("2", "c")):
        assert run("ensemble", cfg, tmp_path / d, "--seed", seed, "--threads", "2") == 0
    a = (tmp_path / "a" / "ensemble_spectrum.txt").read_bytes()
    assert a == (tmp_path / "b" / "ensemble_spectrum.txt").read_bytes()
    assert a != (tmp_path / "c" / "ensemble_spectrum.txt").read_bytes()


def test_wigner_command(tmp_path):
    cfg = write_cfg(tmp_path, L_D="10cm", extra="\n[run]\nwigner_downsample = 2, 2\n")
    assert run("wigner", cfg, tmp_path) == 0
    s = read_summary(tmp_path / "summary.txt")
    assert float(s["wigner_initial.negativity"]) > -1e-4
    assert (tmp_path / "wigner_initial.txt").exists()


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "apinem", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "phase-diagram" in out.stdout
