"""End-to-end CLI runs: artifacts, determinism, manifests, exit codes."""

import hashlib
import json
import os

import numpy as np
import pytest

from mwqed.cli import main


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


LATTICE = {"s_z": 8, "s_perp": 10}


def test_rates_outputs_and_manifest(tmp_path, capsys):
    cfg = write_config(tmp_path, "c.json", {
        "mode": "rates", "lattice": LATTICE,
        "drive": {"omega_over_omega_r": 1.0, "delta_over_omega_r": 4.0}})
    out = tmp_path / "out"
    assert main(["rates", "--config", cfg, "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "Gamma_1 = 2pi x 0.236 kHz" in text
    assert "eta" in text
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["drive"]["phi"] == 0.0  # defaults materialized
    digest = hashlib.sha256((out / "rates.csv").read_bytes()).hexdigest()
    assert manifest["outputs"]["rates.csv"] == digest
    assert manifest["derived_constants"]["gamma_1_khz"] == pytest.approx(
        0.23562122, rel=1e-6)


def test_spectrum_reproduces_pole_table(tmp_path):
    cfg = write_config(tmp_path, "c.json", {
        "mode": "spectrum", "lattice": LATTICE,
        "drive": {"omega_over_omega_r": 1.0, "delta_over_omega_r": 4.0}})
    out = tmp_path / "out"
    assert main(["spectrum", "--config", cfg, "--out", str(out)]) == 0
    table = np.genfromtxt(out / "poles.csv", delimiter=",", names=True,
                          dtype=None, encoding="utf-8")
    classes = list(np.atleast_1d(table["class"]))
    assert {"BS", "sR", "SR"} <= set(classes)
    sr = np.atleast_1d(table)[classes.index("SR")]
    assert abs(sr["re_omega"] - 4.09) < 0.015
    assert abs(sr["im_omega"] + 0.10) < 0.015


def test_malformed_json_exits_2_without_partial_outputs(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{broken")
    out = tmp_path / "out"
    assert main(["rates", "--config", str(bad), "--out", str(out)]) == 2
    assert not out.exists()


def test_unknown_key_rejected_with_pointer(tmp_path, capsys):
    cfg = write_config(tmp_path, "c.json", {
        "mode": "rates", "lattice": {"s_z": 8, "s_perp": 10, "sz_typo": 1}})
    assert main(["rates", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "lattice.sz_typo" in capsys.readouterr().err


def test_mode_mismatch_rejected(tmp_path):
    cfg = write_config(tmp_path, "c.json", {"mode": "rates"})
    assert main(["spectrum", "--config", cfg,
                 "--out", str(tmp_path / "o")]) == 2


def test_physics_error_exits_1(tmp_path, capsys):
    cfg = write_config(tmp_path, "c.json", {
        "mode": "rates", "lattice": {"s_z": -3}})
    assert main(["rates", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
    assert "depth" in capsys.readouterr().err


def test_evolve_spectral_and_fit_roundtrip(tmp_path, capsys):
    cfg = write_config(tmp_path, "ev.json", {
        "mode": "evolve", "lattice": LATTICE,
        "drive": {"omega_over_omega_r": 1.0, "delta_over_omega_r": 4.0},
        "evolve": {"method": "spectral", "t_max_ms": 0.25, "n_t": 126}})
    out = tmp_path / "ev"
    assert main(["evolve", "--config", cfg, "--out", str(out),
                 "--no-figures"]) == 0
    table = np.genfromtxt(out / "trajectory.csv", delimiter=",", names=True)
    assert table["p_excited"][0] == pytest.approx(1.0, abs=1e-5)
    assert table["p_excited"][-1] < 0.5

    fit_cfg = write_config(tmp_path, "fit.json", {
        "mode": "fit", "lattice": LATTICE,
        "fit": {"kind": "piecewise", "input": str(out / "trajectory.csv"),
                "time_column": "t_ms", "value_column": "p_excited"}})
    fit_out = tmp_path / "fit"
    assert main(["fit", "--config", fit_cfg, "--out", str(fit_out)]) == 0
    report = json.loads((fit_out / "fit.json").read_text())
    assert 20.0 <= report["t_c_ms"] * 1e3 <= 70.0


def test_sweep_determinism_and_render(tmp_path):
    cfg = write_config(tmp_path, "sw.json", {
        "mode": "sweep", "lattice": LATTICE,
        "drive": {"omega_over_omega_r": 0.6},
        "model": {"sites": 3},
        "sweep": {"delta_min": 1.0, "delta_max": 4.0, "n_delta": 2,
                  "n_phi": 3, "t_pulse_ms": 0.1}})
    out1, out2 = tmp_path / "s1", tmp_path / "s2"
    assert main(["sweep", "--config", cfg, "--out", str(out1),
                 "--no-figures"]) == 0
    assert main(["sweep", "--config", cfg, "--out", str(out2),
                 "--no-figures", "--threads", "2"]) == 0
    assert (out1 / "sweep_nk.csv").read_bytes() == \
        (out2 / "sweep_nk.csv").read_bytes()

    rd_cfg = write_config(tmp_path, "rd.json", {
        "mode": "render",
        "render": {"input": str(out1 / "sweep_nk.csv"), "style": "sweep"}})
    rd_out = tmp_path / "rd"
    assert main(["render", "--config", rd_cfg, "--out", str(rd_out)]) == 0
    assert (rd_out / "sweep_map.png").exists()


def test_master_subcommand(tmp_path):
    cfg = write_config(tmp_path, "m.json", {
        "mode": "master", "lattice": {"s_z": 60, "s_perp": 50},
        "drive": {"omega_over_omega_r": 1.0, "delta_over_omega_r": 4.0},
        "master": {"register": ["pi/2", "pi/2", "empty"], "t_max_ms": 0.1,
                   "n_t": 11}})
    out = tmp_path / "out"
    assert main(["master", "--config", cfg, "--out", str(out),
                 "--no-figures"]) == 0
    table = np.genfromtxt(out / "master_populations.csv", delimiter=",",
                          names=True)
    assert np.allclose(table["N_g"], table["N_g"][0], atol=1e-6)
    assert table["N_r"][-1] < table["N_r"][0]


def test_defaults_only_run(tmp_path):
    # every subcommand must run with an empty config (all defaults)
    out = tmp_path / "out"
    assert main(["rates", "--out", str(out), "--no-figures"]) == 0
    assert (out / "manifest.json").exists()
