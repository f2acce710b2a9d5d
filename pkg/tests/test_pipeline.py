import logging
import os

import numpy as np
import pandas as pd
import pytest

from entspec import provenance
from entspec.exceptions import CollapseError, ConfigError, IncompleteDataError
from entspec.models import RunRecord, STATUS_RUNNING, get_engine, get_session
from entspec.pipeline import (
    Analyzer, analyze, build_recipe, load_reports, load_run_config, parse_run_config, run_collapse,
    run_recipe, simulate, verify_manifest, write_synthetic,
)
from entspec.rmt import POISSON_MEAN_R_TILDE
from main import main


def _config(directory="tiny", **overrides):
    data = {
        "lattice": {"dimension": 1, "size": 8},
        "evolution": {"gammas": "0.1, 0.5", "burn_in": 0.5, "sample_interval": 0.5, "samples": 3},
        "ensemble": {"trajectories": 4, "seed": 42, "workers": 1},
        "observables": {"geometries": "half_cut", "keep_eigenvectors": True,
                        "observables": "spectrum, entropy_curve, half_cut_entropy"},
        "output": {"directory": directory},
    }
    for section, values in overrides.items():
        data[section] = dict(data[section], **values)
    return parse_run_config(data)


def _checksums(summary):
    return {path: provenance.file_checksum(os.path.join(summary.directory, path))
            for path in summary.outputs}


@pytest.fixture
def restore_logging():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def tiny_run(output_root):
    return simulate(_config(), show_progress=False)


# configuration

def test_config_parses_comma_lists():
    config = _config()
    assert config.evolution.gammas == [0.1, 0.5]
    assert config.observables.observables == ["spectrum", "entropy_curve", "half_cut_entropy"]
    assert config.evolution_config(0.5).gamma == 0.5


def test_config_hash_ignores_workers_and_output():
    base = _config()
    assert base.config_hash() == _config("elsewhere", ensemble={"workers": 3}).config_hash()
    assert base.config_hash() != _config(ensemble={"seed": 43}).config_hash()


@pytest.mark.parametrize("overrides", [
    {"evolution": {"gammas": "-1.0"}},
    {"evolution": {"initial_state": "ferromagnet"}},
    {"observables": {"observables": "spectrum, magnetization"}},
    {"observables": {"geometries": "annulus"}},
    {"ensemble": {"trajectories": 0}},
    {"lattice": {"dimension": 2, "size": 2}},
])
def test_invalid_configs_raise_config_error(overrides):
    with pytest.raises(ConfigError):
        _config(**overrides)


def test_ini_round_trip(tmp_path):
    config = _config()
    path = tmp_path / "run.ini"
    path.write_text(config.to_ini())
    loaded = load_run_config(str(path))
    assert loaded.config_hash() == config.config_hash()
    assert loaded.observables.keep_eigenvectors is True


def test_missing_ini_raises(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(str(tmp_path / "absent.ini"))


# simulate

def test_simulate_writes_a_verified_ensemble(tiny_run, output_root):
    assert tiny_run.directory == os.path.join(str(output_root), "tiny")
    assert tiny_run.trajectories_run == 8
    assert "gamma_0.1/spectra_half_cut.csv" in tiny_run.outputs
    assert "gamma_0.5/eigenweights_half_cut.npy" in tiny_run.outputs
    assert "gamma_0.5/observables.csv" in tiny_run.outputs

    verified = verify_manifest(tiny_run.directory)
    assert verified.config_hash == tiny_run.config_hash
    assert len(verified.outputs) == len(tiny_run.outputs)

    spectra, header = provenance.read_csv(os.path.join(tiny_run.directory, "gamma_0.1", "spectra_half_cut.csv"))
    assert len(spectra) == 4 * 3 * 4
    assert header["geometry"] == "half_cut"
    weights = np.load(os.path.join(tiny_run.directory, "gamma_0.1", "eigenweights_half_cut.npy"))
    assert weights.shape == (12, 4, 4)
    assert weights.dtype == np.dtype("<f8")
    assert np.allclose(weights.sum(axis=1), 1.0)


def test_stationarity_uses_scalar_observables(tiny_run):
    assert set(tiny_run.stationarity) == {"half_cut_entropy@0.1", "half_cut_entropy@0.5"}


def test_spectrum_only_runs_check_stationarity_of_the_spectrum_entropy(output_root):
    summary = simulate(_config("spectra_only", observables={"observables": "spectrum"}), show_progress=False)
    assert "gamma_0.1/observables.csv" not in summary.outputs
    assert set(summary.stationarity) == {"spectrum_entropy:half_cut@0.1", "spectrum_entropy:half_cut@0.5"}
    assert all(np.isfinite(z) for z in summary.stationarity.values())


def test_simulate_is_deterministic(tiny_run):
    again = simulate(_config("tiny_again"), show_progress=False)
    assert _checksums(again) == _checksums(tiny_run)


@pytest.mark.slow
def test_worker_count_does_not_change_results(tiny_run):
    parallel = simulate(_config("tiny_parallel"), workers=2, show_progress=False)
    assert _checksums(parallel) == _checksums(tiny_run)


def test_simulate_resumes_completed_trajectories(tiny_run):
    before = _checksums(tiny_run)
    resumed = simulate(_config(), show_progress=False)
    assert resumed.trajectories_run == 0
    assert resumed.trajectories_resumed == 8
    assert _checksums(resumed) == before


def test_directory_holding_another_run_is_refused(tiny_run):
    with pytest.raises(ConfigError):
        simulate(_config(ensemble={"seed": 7}), show_progress=False)


def test_zero_samples_give_an_empty_inventory(output_root):
    summary = simulate(_config("empty", evolution={"samples": 0}), show_progress=False)
    assert summary.outputs == []
    assert verify_manifest(summary.directory).outputs == []
    assert analyze([summary.directory], ["gap_ratio"], str(output_root / "reports")) == []


# analyze

def test_analyze_tiny_run(tiny_run, output_root):
    reports = str(output_root / "reports")
    written = analyze([tiny_run.directory], ["gap_ratio", "kl1", "kl2", "dos", "entropy_curve",
                                             "entropy_dynamics"], reports)
    names = {os.path.basename(p) for p in written}
    assert {"gap_ratio.csv", "kl1.csv", "kl2.csv", "dos_summary.csv", "scaling_fits.csv",
            "growth_fits.csv"} <= names
    assert "entropy_curve_d1_L8_gamma_0.5.csv" in names

    gap, header = provenance.read_csv(os.path.join(reports, "gap_ratio.csv"))
    assert gap["gamma"].tolist() == [0.1, 0.5]
    assert gap["mean"].between(0.0, 1.0).all()
    assert header["sources"] == tiny_run.config_hash[:12]

    kl2_table, _ = provenance.read_csv(os.path.join(reports, "kl2.csv"))
    assert kl2_table["n"].tolist() == [2, 2]

    assert {"gap_ratio_samples.csv", "kl1_samples.csv", "kl2_samples.csv"} <= names
    gap_samples, _ = provenance.read_csv(os.path.join(reports, "gap_ratio_samples.csv"))
    assert gap_samples.groupby("gamma")["trajectory_id"].nunique().tolist() == [4, 4]
    kl1_samples, _ = provenance.read_csv(os.path.join(reports, "kl1_samples.csv"))
    kl1_table, _ = provenance.read_csv(os.path.join(reports, "kl1.csv"))
    assert kl1_samples.groupby("gamma")["value"].mean().to_numpy() == pytest.approx(kl1_table["mean"].to_numpy())
    kl2_samples, _ = provenance.read_csv(os.path.join(reports, "kl2_samples.csv"))
    assert len(kl2_samples) == 4


def test_empty_diagnostics_do_nothing(tiny_run, output_root):
    reports = output_root / "no_reports"
    assert analyze([tiny_run.directory], [], str(reports)) == []
    assert not reports.exists()


def test_unknown_diagnostic_is_rejected(tiny_run):
    with pytest.raises(ValueError):
        Analyzer([tiny_run.directory], ["entanglement_negativity"], "reports")


def test_missing_manifest_is_incomplete(output_root):
    with pytest.raises(IncompleteDataError):
        verify_manifest(str(output_root / "nothing_here"))


def test_unfinished_run_is_incomplete(tiny_run):
    engine = get_engine(tiny_run.directory)
    with get_session(engine) as session:
        session.query(RunRecord).first().status = STATUS_RUNNING
    engine.dispose()
    with pytest.raises(IncompleteDataError):
        verify_manifest(tiny_run.directory)


def test_tampered_output_fails_verification(tiny_run):
    path = os.path.join(tiny_run.directory, "gamma_0.1", "observables.csv")
    with open(path, "a") as handle:
        handle.write("\n")
    with pytest.raises(IncompleteDataError):
        verify_manifest(tiny_run.directory)


# synthetic ensembles

def test_synthetic_poisson_calibrates_the_gap_ratio(output_root):
    summary = write_synthetic("poisson", 100, 100, "poisson", seed=2)
    assert summary.outputs == ["gamma_0/spectra_synthetic_poisson.csv",
                               "gamma_0/eigenweights_synthetic_poisson.npy"]
    reports = str(output_root / "reports")
    analyze([summary.directory], ["gap_ratio", "kl1"], reports)
    gap, _ = provenance.read_csv(os.path.join(reports, "gap_ratio.csv"))
    assert gap.loc[0, "mean"] == pytest.approx(POISSON_MEAN_R_TILDE, abs=0.01)
    assert gap.loc[0, "geometry"] == "synthetic_poisson"


@pytest.mark.parametrize("kind, levels, samples", [("goe", 10, 2), ("gue", 2, 2), ("gue", 10, 0)])
def test_synthetic_input_checks(output_root, kind, levels, samples):
    with pytest.raises(ConfigError):
        write_synthetic(kind, levels, samples, "bad")


# collapse stage

def _write_report(path, gammas, sizes, d=2, geometry="half_cut"):
    rows = []
    for size in sizes:
        for gamma in gammas:
            rows.append({"d": d, "L": size, "gamma": gamma, "geometry": geometry,
                         "mean": np.tanh(0.25 * (gamma - 5.0) * size), "stderr": 0.01, "n": 50})
    provenance.write_csv(pd.DataFrame(rows), str(path), {"report": "gap_ratio"})
    return str(path)


def test_collapse_stage_writes_tables(tmp_path):
    report = _write_report(tmp_path / "gap_ratio.csv", np.linspace(4.5, 5.5, 11), (8, 12, 16))
    out = tmp_path / "collapse"
    result = run_collapse([report], "gap_ratio", output_dir=str(out))
    assert result.gamma_c == pytest.approx(5.0, abs=0.02)
    for name in ("collapse_gap_ratio_linear.csv", "collapse_gap_ratio_linear_heatmap.csv",
                 "crossings_gap_ratio.csv"):
        assert (out / name).exists()
    crossings, header = provenance.read_csv(str(out / "crossings_gap_ratio.csv"))
    assert np.allclose(crossings["gamma"], 5.0, atol=1e-9)
    assert header["sizes"] == "8,12,16"


def test_collapse_bootstrap_resamples_trajectories(tmp_path):
    gammas, sizes = np.linspace(4.5, 5.5, 11), (8, 12, 16)
    report = _write_report(tmp_path / "gap_ratio.csv", gammas, sizes)
    rng = np.random.default_rng(3)
    rows = []
    for size in sizes:
        for gamma in gammas:
            values = np.tanh(0.25 * (gamma - 5.0) * size) + rng.normal(0.0, 0.045, 20)
            rows += [{"d": 2, "L": size, "gamma": gamma, "geometry": "half_cut", "trajectory_id": i, "value": v}
                     for i, v in enumerate(values)]
    provenance.write_csv(pd.DataFrame(rows), str(tmp_path / "gap_ratio_samples.csv"), {"report": "gap_ratio"})

    out = tmp_path / "collapse"
    result = run_collapse([report], "gap_ratio", output_dir=str(out), bootstrap=4)
    assert result.bootstrap["n_samples"] == len(gammas) * len(sizes) * 20
    assert result.bootstrap["gamma_c_mean"] == pytest.approx(5.0, abs=0.05)
    summary, _ = provenance.read_csv(str(out / "collapse_gap_ratio_linear.csv"))
    assert summary.loc[0, "bootstrap_n_samples"] == len(gammas) * len(sizes) * 20


def test_collapse_bootstrap_without_samples_draws_gaussians(tmp_path):
    report = _write_report(tmp_path / "gap_ratio.csv", np.linspace(4.5, 5.5, 11), (8, 12, 16))
    result = run_collapse([report], "gap_ratio", output_dir=str(tmp_path / "collapse"), bootstrap=2)
    assert result.bootstrap["n_samples"] == 0


def test_reports_mixing_dimensions_need_a_selection(tmp_path):
    gammas = np.linspace(4.5, 5.5, 6)
    two = _write_report(tmp_path / "d2.csv", gammas, (8, 12), d=2)
    three = _write_report(tmp_path / "d3.csv", gammas, (4, 6), d=3)
    with pytest.raises(CollapseError):
        load_reports([two, three])
    assert set(load_reports([two, three], dimension=3)["L"]) == {4, 6}


def test_reports_need_gamma_and_size(tmp_path):
    path = tmp_path / "bad.csv"
    provenance.write_csv(pd.DataFrame({"gamma": [1.0], "mean": [0.5]}), str(path), {})
    with pytest.raises(CollapseError):
        load_reports([str(path)])


# figure recipes

def test_figure_recipe_layout(output_root):
    recipe = build_recipe(5, "figures", sizes=[8, 12, 16], trajectories=3)
    assert recipe.directory == os.path.join(str(output_root), "figures", "figure5")
    assert len(recipe.runs) == 3
    assert [step.report for step in recipe.collapses] == ["gap_ratio", "kl1"]
    run = recipe.runs[0]
    assert run.ensemble.trajectories == 3
    assert run.observables.keep_eigenvectors
    assert run.output.directory == os.path.join(recipe.directory, "d2_L8")


@pytest.mark.parametrize("number", [3, 4, 5, 6, 7])
def test_spectral_figures_use_the_checkerboard(output_root, number):
    recipe = build_recipe(number, "figures", sizes=[4], gammas=[1.0])
    for run in recipe.runs:
        assert run.observables.geometries == ["checkerboard"]
    for step in recipe.collapses + recipe.crossings:
        assert step.geometry == "checkerboard"


def test_entropy_figures_keep_the_half_cut(output_root):
    for number in (1, 8):
        for run in build_recipe(number, "figures", sizes=[8]).runs:
            assert run.observables.geometries == ["half_cut"]


def test_figure_one_adds_neel_dynamics(output_root):
    recipe = build_recipe(1, "figures", sizes=[8])
    neel = recipe.runs[1]
    assert neel.evolution.initial_state == "neel"
    assert neel.evolution.burn_in == 0.0
    assert neel.evolution.samples == 32
    assert neel.output.directory.endswith("d2_L8_neel")


def test_unknown_figure(output_root):
    with pytest.raises(ConfigError):
        build_recipe(9, "figures")


@pytest.mark.slow
def test_small_figure_runs_end_to_end(output_root):
    recipe = build_recipe(3, "figures", sizes=[4], gammas=[0.5], trajectories=2)
    written = run_recipe(recipe, show_progress=False)
    assert written["simulate"]
    gap, _ = provenance.read_csv(os.path.join(recipe.reports_dir, "gap_ratio.csv"))
    assert gap["L"].tolist() == [4]


# command line

def test_cli_synthetic_then_analyze(output_root, restore_logging):
    assert main(["-q", "synthetic", "poisson", "--levels", "50", "--samples", "40", "--output", "cli"]) == 0
    reports = str(output_root / "cli_reports")
    assert main(["-q", "analyze", "cli", "--diagnostics", "gap_ratio", "--output", reports]) == 0
    gap, _ = provenance.read_csv(os.path.join(reports, "gap_ratio.csv"))
    assert gap.loc[0, "mean"] == pytest.approx(POISSON_MEAN_R_TILDE, abs=0.03)


def test_cli_incomplete_data_exit_code(output_root, restore_logging):
    assert main(["-q", "analyze", "missing", "--output", str(output_root / "r")]) == 3


def test_cli_config_error_exit_code(tmp_path, restore_logging):
    path = tmp_path / "bad.ini"
    path.write_text("[lattice]\ndimension = 2\nsize = 2\n\n[evolution]\ngammas = 1.0\n\n"
                    "[ensemble]\ntrajectories = 1\n")
    assert main(["-q", "simulate", str(path)]) == 1
    assert main(["-q", "simulate", str(tmp_path / "absent.ini")]) == 1


def test_cli_runtime_failure_exit_code(tmp_path, restore_logging):
    path = tmp_path / "bad.csv"
    provenance.write_csv(pd.DataFrame({"gamma": [1.0], "mean": [0.5]}), str(path), {})
    assert main(["-q", "collapse", str(path), "--observable", "x", "--output", str(tmp_path)]) == 2
