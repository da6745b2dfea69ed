import json

import numpy as np
import pytest

from volcano.cli import EnsembleConfig, main, parse_config, run


def test_parse_defaults():
    cfg = parse_config(["simulate"])
    assert cfg.experiment == "simulate"
    assert cfg.n == 250 and cfg.k == 4 and cfg.j == [2.0]
    assert cfg.transient_steps == 1000 and cfg.recorded_steps == 2000


def test_parse_flags_override_config_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"n": 100, "k": 2, "seed": 5}))
    cfg = parse_config(["volcano", "--config", str(path), "--N", "64"])
    assert cfg.n == 64  # flag wins
    assert cfg.k == 2 and cfg.seed == 5  # file values kept


def test_parse_rejects_unknown_config_keys(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"coupling_strength": 1.0}))
    with pytest.raises(ValueError):
        parse_config(["simulate", "--config", str(path)])


def test_config_validation_errors():
    with pytest.raises(ValueError):
        EnsembleConfig(experiment="nope").validate()
    with pytest.raises(ValueError):
        EnsembleConfig(experiment="simulate", k=3).validate()
    with pytest.raises(ValueError):
        EnsembleConfig(experiment="simulate", j=[-1.0]).validate()
    with pytest.raises(ValueError):
        EnsembleConfig(experiment="simulate", dt=0.0).validate()
    with pytest.raises(ValueError):
        EnsembleConfig(experiment="simulate", initial="random").validate()


def test_main_exit_codes(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    assert main(["simulate", "--config", str(missing)]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"k": 3}))
    assert main(["simulate", "--config", str(bad)]) == 2


def _run_cli(tmp_path, argv):
    outdir = tmp_path / "out"
    code = main(argv + ["--outdir", str(outdir)])
    assert code == 0
    manifest = json.loads((outdir / "manifest.json").read_text())
    return outdir, manifest


def test_simulate_artifacts(tmp_path):
    outdir, manifest = _run_cli(tmp_path, [
        "simulate", "--N", "40", "--K", "2", "--J", "1.0", "--seed", "3",
        "--transient-steps", "10", "--recorded-steps", "20"])
    assert set(manifest["files"]) == {"trajectory.csv", "system.json"}
    data = np.loadtxt(outdir / "trajectory.csv", delimiter=",", skiprows=1)
    assert data.shape == (20, 3)
    spec = json.loads((outdir / "system.json").read_text())
    assert spec["n"] == 40 and spec["k"] == 2
    assert manifest["config"]["seed"] == 3
    assert manifest["realization_seeds"] == [[3, 0]]


def test_volcano_artifacts_multiple_j(tmp_path):
    outdir, manifest = _run_cli(tmp_path, [
        "volcano", "--N", "40", "--K", "2", "--J", "1.0", "3.0",
        "--realizations", "2", "--transient-steps", "20",
        "--recorded-steps", "40", "--bins", "8"])
    assert set(manifest["files"]) == {
        "radial_J1.csv", "moments_J1.json", "radial_J3.csv", "moments_J3.json"}
    summary = json.loads((outdir / "moments_J1.json").read_text())
    for key in ("n_samples", "m_plus1", "m_minus1", "product", "stderr",
                "gamma", "classification", "z"):
        assert key in summary
    hist = np.loadtxt(outdir / "radial_J1.csv", delimiter=",", skiprows=1)
    assert hist.shape == (8, 2)


def test_critical_artifacts(tmp_path):
    outdir, manifest = _run_cli(tmp_path, [
        "critical", "--N", "48", "--K", "2", "--j-lo", "0.2", "--j-hi", "8.0",
        "--accuracy", "2.0", "--max-sims", "8", "--transient-steps", "40",
        "--recorded-steps", "80"])
    assert set(manifest["files"]) == {"critical.json", "decisions.csv"}
    payload = json.loads((outdir / "critical.json").read_text())
    for key in ("j_c", "bracket", "log", "n", "k", "accuracy", "coupling"):
        assert key in payload
    assert payload["bracket"][0] <= payload["j_c"] <= payload["bracket"][1]


def test_oa_artifacts(tmp_path):
    outdir, manifest = _run_cli(tmp_path, [
        "oa", "--K", "4", "--J", "1.0", "--steps", "20"])
    assert set(manifest["files"]) == {"spectrum.json", "oa_trajectory.csv"}
    spec = json.loads((outdir / "spectrum.json").read_text())
    assert spec["critical_coupling"] == 2.0
    assert spec["eigenvalues"]["plus"]["value"] == 16
    assert spec["eigenvalues"]["zero"]["multiplicity"] == 12


def test_decay_artifacts_with_baseline(tmp_path):
    outdir, manifest = _run_cli(tmp_path, [
        "decay", "--N", "40", "--K", "2", "--J", "2.0", "--steps", "15",
        "--realizations", "2", "--baseline"])
    assert set(manifest["files"]) == {"decay.csv", "decay_baseline.csv"}
    data = np.loadtxt(outdir / "decay.csv", delimiter=",", skiprows=1)
    assert data.shape == (16, 3)


def test_phases_artifacts(tmp_path):
    outdir, manifest = _run_cli(tmp_path, [
        "phases", "--N", "30", "--K", "2", "--J", "1.0",
        "--transient-steps", "10", "--recorded-steps", "40",
        "--snapshot-stride", "20", "--delta-bins", "6"])
    assert set(manifest["files"]) == {"phasemap.csv"}
    data = np.loadtxt(outdir / "phasemap.csv", delimiter=",", skiprows=1)
    assert data.shape == (3 * 6, 3)  # (K+1) coupling slices x delta bins


def test_rerun_is_byte_identical(tmp_path):
    argv = ["simulate", "--N", "30", "--K", "2", "--J", "1.5", "--seed", "7",
            "--transient-steps", "5", "--recorded-steps", "10"]
    _, m1 = _run_cli(tmp_path / "a", argv)
    _, m2 = _run_cli(tmp_path / "b", argv)
    assert m1["files"] == m2["files"]  # same sha256 for every artifact


def test_worker_count_independence(tmp_path):
    base = ["volcano", "--N", "30", "--K", "2", "--J", "1.0",
            "--realizations", "3", "--transient-steps", "10",
            "--recorded-steps", "20", "--bins", "6"]
    _, m1 = _run_cli(tmp_path / "w1", base + ["--workers", "1"])
    _, m2 = _run_cli(tmp_path / "w2", base + ["--workers", "3"])
    assert m1["files"] == m2["files"]
