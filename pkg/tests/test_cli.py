"""End-to-end command line runs on miniature systems."""

import json

import numpy as np
import pytest

from finitebath.cli import EXIT_CONFIG, EXIT_FIT, EXIT_OK, main
from finitebath.output import read_curve, read_histogram

QUICK = {
    "bath1_size": 150,
    "bath1_mass": 0.01,
    "bath1_temperature": 5.0,
    "mean_interval": 2.0,
    "n_samples": 400,
    "warmup": 100.0,
}

TWOBATH = {
    "bath1_size": 60,
    "bath1_mass": 0.01,
    "bath1_temperature": 5.0,
    "bath2_size": 60,
    "bath2_mass": 0.01,
    "bath2_temperature": 5.0,
    "mean_interval": 1.5,
    "n_samples": 200,
    "warmup": 50.0,
    "omega_grid": [0.4],
    "seeds": [1],
}


@pytest.fixture
def quick_config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(QUICK))
    return path


@pytest.fixture
def twobath_config(tmp_path):
    path = tmp_path / "twobath.json"
    path.write_text(json.dumps(TWOBATH))
    return path


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "finitebath" in capsys.readouterr().out


def test_missing_subcommand_is_a_usage_error():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_single_writes_histograms_and_summary(tmp_path, quick_config, capsys):
    out = tmp_path / "run"
    code = main(["single", "--config", str(quick_config), "--omega", "0.5",
                 "--seed-list", "1", "2", "--out", str(out)])
    assert code == EXIT_OK
    assert "aggregate over 2 seeds" in capsys.readouterr().out
    for name in ("hist_seed1.csv", "hist_seed1.json", "hist_seed2.csv",
                 "summary.json", "manifest.json"):
        assert (out / name).exists()
    summary = json.loads((out / "summary.json").read_text())
    assert 3.0 < summary["temperature"] < 8.0
    assert summary["n_seeds"] == 2
    hist = read_histogram(out / "hist_seed1.csv")
    assert hist.counts.sum() > 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "single"
    assert "summary.json" in manifest["outputs"]


def test_single_needs_exactly_one_frequency(tmp_path, quick_config, capsys):
    code = main(["single", "--config", str(quick_config),
                 "--set", "omega_grid=[0.3, 0.5]",
                 "--out", str(tmp_path / "x")])
    assert code == EXIT_CONFIG
    assert "exactly one frequency" in capsys.readouterr().err


def test_single_reports_unfittable_distributions(tmp_path, quick_config, capsys):
    # far detuned with a monochromatic energy: everything in one bin
    code = main(["single", "--config", str(quick_config), "--omega", "50.0",
                 "--set", "initial_energy=5.0", "--set", "n_bins=10",
                 "--set", "bath1_mass=0.001",
                 "--seed-list", "1", "--out", str(tmp_path / "x")])
    assert code == EXIT_FIT
    assert "fit failure" in capsys.readouterr().err


def test_set_overrides_reach_the_manifest(tmp_path, quick_config):
    out = tmp_path / "run"
    code = main(["single", "--config", str(quick_config), "--omega", "0.5",
                 "--set", "bath1_dos=uniform", "--set", "n_samples=150",
                 "--seed-list", "1", "--out", str(out)])
    assert code == EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["bath1_dos"] == "uniform"
    assert manifest["config"]["n_samples"] == 150


def test_unknown_config_key_exits_with_config_error(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"omga": 0.5}))
    code = main(["sweep", "--config", str(path), "--out", str(tmp_path / "x")])
    assert code == EXIT_CONFIG
    assert "unknown config key" in capsys.readouterr().err


def test_sweep_writes_the_curve(tmp_path, quick_config, capsys):
    out = tmp_path / "run"
    code = main(["sweep", "--config", str(quick_config),
                 "--set", "omega_grid=[0.5]", "--seed-list", "1",
                 "--out", str(out)])
    assert code == EXIT_OK
    assert "1/1 grid points fitted" in capsys.readouterr().out
    cols = read_curve(out / "curve.csv")
    assert cols["omega"][0] == 0.5
    assert 3.0 < cols["T_tp"][0] < 8.0
    assert np.isfinite(cols["T_bath_init"][0])


def test_twobath_needs_a_second_bath(tmp_path, quick_config, capsys):
    code = main(["twobath", "--config", str(quick_config),
                 "--set", "omega_grid=[0.4]", "--out", str(tmp_path / "x")])
    assert code == EXIT_CONFIG
    assert "bath2" in capsys.readouterr().err


def test_twobath_writes_combined_and_alone_curves(tmp_path, twobath_config):
    out = tmp_path / "run"
    code = main(["twobath", "--config", str(twobath_config), "--out", str(out)])
    assert code == EXIT_OK
    for name in ("curve_combined.csv", "curve_bath1_alone.csv",
                 "curve_bath2_alone.csv", "manifest.json"):
        assert (out / name).exists()
    combined = read_curve(out / "curve_combined.csv")
    assert combined["omega"][0] == 0.4


def test_single_uses_the_switched_pair_when_bath2_is_configured(
        tmp_path, twobath_config):
    out = tmp_path / "run"
    code = main(["single", "--config", str(twobath_config), "--omega", "0.4",
                 "--out", str(out)])
    assert code == EXIT_OK
    assert (out / "summary.json").exists()


def test_oracle_mixture_profile(tmp_path):
    out = tmp_path / "run"
    code = main(["oracle", "mixture", "--t1", "5", "--t2", "10",
                 "--out", str(out)])
    assert code == EXIT_OK
    lines = (out / "mixture.csv").read_text().strip().splitlines()
    assert lines[0] == "energy,density,t_eff"
    e0_row = [float(x) for x in lines[1].split(",")]
    assert e0_row[0] == 0.0
    assert e0_row[1] == pytest.approx(0.15, rel=1e-12)
    assert e0_row[2] == pytest.approx(7.5, rel=1e-9)


def test_oracle_degenerate_series(tmp_path):
    out = tmp_path / "run"
    code = main(["oracle", "degenerate", "--e0", "10", "--omega-r", "1",
                 "--t-final", "20", "--n-points", "200", "--out", str(out)])
    assert code == EXIT_OK
    rows = [[float(x) for x in ln.split(",")]
            for ln in (out / "degenerate.csv").read_text().strip().splitlines()[1:]]
    energies = np.array(rows)[:, 1]
    assert np.all(energies >= 0.0)
    assert np.all(energies <= 10.0)
    assert np.max(energies) > 9.0


def test_oracle_kernel_starts_at_the_spring_sum(tmp_path, quick_config):
    out = tmp_path / "run"
    code = main(["oracle", "kernel", "--config", str(quick_config),
                 "--t-final", "10", "--n-points", "50", "--out", str(out)])
    assert code == EXIT_OK
    first = (out / "kernel.csv").read_text().strip().splitlines()[1]
    tau0, k0 = (float(x) for x in first.split(","))
    assert tau0 == 0.0
    # 150 oscillators, m = 0.01, <w^2> ~ 0.41 for the default band
    assert k0 == pytest.approx(150 * 0.01 * 0.41, rel=0.2)


def test_oracle_langevin_runs_quickly(tmp_path):
    out = tmp_path / "run"
    code = main(["oracle", "langevin", "--gamma", "1", "--temperature", "2",
                 "--t-final", "5", "--dt", "0.01", "--n-paths", "4",
                 "--out", str(out)])
    assert code == EXIT_OK
    lines = (out / "langevin.csv").read_text().strip().splitlines()
    assert lines[0] == "path,t,energy"
    assert len(lines) > 4


def test_fit_round_trips_a_stored_histogram(tmp_path, capsys):
    edges = np.linspace(0.0, 8.0, 41)
    centers = 0.5 * (edges[:-1] + edges[1:])
    counts = np.rint(2000.0 * np.exp(-centers / 3.7)).astype(int)
    lines = ["bin_lo,bin_hi,count"] + [
        f"{lo},{hi},{c}" for lo, hi, c in zip(edges[:-1], edges[1:], counts)]
    path = tmp_path / "hist.csv"
    path.write_text("\n".join(lines) + "\n")
    json_out = tmp_path / "fit.json"
    code = main(["fit", str(path), "--json-out", str(json_out)])
    assert code == EXIT_OK
    assert "T = " in capsys.readouterr().out
    result = json.loads(json_out.read_text())
    assert result["temperature"] == pytest.approx(3.7, rel=0.02)


def test_fit_rejects_rising_histograms(tmp_path, capsys):
    lines = ["bin_lo,bin_hi,count"] + [
        f"{i},{i + 1},{2 ** i}" for i in range(8)]
    path = tmp_path / "hist.csv"
    path.write_text("\n".join(lines) + "\n")
    assert main(["fit", str(path)]) == EXIT_FIT
    assert "not thermal" in capsys.readouterr().err


def test_fit_missing_file_is_a_config_error(tmp_path, capsys):
    assert main(["fit", str(tmp_path / "nope.csv")]) == EXIT_CONFIG
    assert "cannot read histogram" in capsys.readouterr().err
