"""
Analysis stage: reads verified ensemble directories and emits CSV reports.
"""
from collections import defaultdict
from dataclasses import dataclass
import json
import os
from typing import Dict, List, Optional, Sequence
import logging

import numpy as np
import pandas as pd

from .. import provenance
from ..config import Config
from ..exceptions import IncompleteDataError
from ..models import OutputFile, RunRecord, STATUS_COMPLETE, get_engine, get_session, manifest_path
from ..observables.series import check_stationarity, density_curve_from_entropies, standard_error, time_series
from ..rmt import (
    gap_ratios, kl1, kl2_values, mean_gap_ratio, r_distribution, spectral_form_factor, thouless_time_blocks, unfold,
)
from ..rmt.ensemble import SpectralEnsemble
from ..scaling.fitting import fit_growth_law, fit_scaling_law, prefactor_extraction
from ..scaling.laws import LAWS
from ..spectrum.dos import density_of_states
from . import storage

logger = logging.getLogger(__name__)

SPECTRAL_DIAGNOSTICS = ("gap_ratio", "r_distribution", "kl1", "kl2", "sff", "thouless", "dos")
ENTROPY_DIAGNOSTICS = ("entropy_curve", "entropy_dynamics", "mutual_information", "prefactor")
DIAGNOSTICS = SPECTRAL_DIAGNOSTICS + ENTROPY_DIAGNOSTICS


@dataclass
class VerifiedEnsemble:
    directory: str
    config_hash: str
    config: dict
    outputs: List[OutputFile]


def verify_manifest(directory: str) -> VerifiedEnsemble:
    """
    Check that a directory holds a complete run whose files match their checksums.

    Raises:
        IncompleteDataError: missing manifest, unfinished run or checksum mismatch
    """
    if not os.path.exists(manifest_path(directory)):
        raise IncompleteDataError(f"No manifest in {directory}")
    engine = get_engine(directory)
    try:
        with get_session(engine) as session:
            run = session.query(RunRecord).first()
            if run is None or run.status != STATUS_COMPLETE:
                status = "missing" if run is None else run.status
                raise IncompleteDataError(f"Run in {directory} is {status}")
            outputs = list(run.outputs)
            verified = VerifiedEnsemble(directory, run.config_hash, json.loads(run.config_json), outputs)
    finally:
        engine.dispose()

    for entry in outputs:
        path = os.path.join(directory, entry.path)
        if not os.path.exists(path):
            raise IncompleteDataError(f"Listed output {entry.path} is missing")
        if provenance.file_checksum(path) != entry.checksum:
            raise IncompleteDataError(f"Checksum mismatch for {entry.path}")
    return verified


def _tag(meta: Dict) -> str:
    return f"d{meta['d']}_L{meta['L']}_{storage.gamma_key(float(meta['gamma']))}_{storage.geometry_key(str(meta['geometry']))}"


def _trajectory_ids(ensemble: SpectralEnsemble) -> List:
    return [s.metadata.get("trajectory_id") for s in ensemble]


def _mean_stderr(values: np.ndarray):
    values = np.asarray(values, dtype=float)
    err = values.std(ddof=1) / np.sqrt(values.size) if values.size > 1 else np.nan
    return float(values.mean()), float(err), int(values.size)


class Analyzer:
    """Computes the requested diagnostics over one or more ensemble directories."""

    def __init__(self, directories: Sequence[str], diagnostics: Sequence[str], output_dir: str,
                 config: Optional[Dict] = None):
        """
        Initialize with configuration.

        Args:
            directories: Ensemble directories written by simulate or synthetic
            diagnostics: Subset of DIAGNOSTICS
            output_dir: Directory for CSV reports
            config: Options including dos_bins, dos_range, eta, thouless_tolerance, thouless_smoothing,
                kl2_matching, r_bins
        """
        unknown = [d for d in diagnostics if d not in DIAGNOSTICS]
        if unknown:
            raise ValueError(f"Unknown diagnostics {unknown}. Valid: {', '.join(DIAGNOSTICS)}")
        self.directories = list(directories)
        self.diagnostics = list(diagnostics)
        self.output_dir = output_dir
        self.config = dict(Config.get_spectrum_config())
        self.config.update(config or {})
        self.tables: Dict[str, List[dict]] = defaultdict(list)
        self.sources: List[str] = []
        self.written: List[str] = []
        self.logger = logging.getLogger("Analyzer")

    def run(self) -> List[str]:
        """Analyze every directory; returns the report paths written."""
        if not self.diagnostics:
            self.logger.info("No diagnostics requested; nothing to do")
            return []
        os.makedirs(self.output_dir, exist_ok=True)

        half_cut: Dict[tuple, List[float]] = defaultdict(list)
        for directory in self.directories:
            verified = verify_manifest(directory)
            self.sources.append(verified.config_hash[:12])
            for entry in sorted(verified.outputs, key=lambda o: o.path):
                path = os.path.join(directory, entry.path)
                try:
                    if entry.kind == "spectra" and any(d in SPECTRAL_DIAGNOSTICS for d in self.diagnostics):
                        self._analyze_spectra(path)
                    elif entry.kind == "observables":
                        self._analyze_observables(path, half_cut)
                except Exception as e:
                    self.logger.error(f"Error analyzing {path}: {str(e)}")
                    raise

        if "prefactor" in self.diagnostics:
            self._prefactor(half_cut)
        self._flush()
        return self.written

    # spectral diagnostics

    def _analyze_spectra(self, path: str) -> None:
        wants = set(self.diagnostics)
        ensemble = storage.load_spectral_ensemble(path, with_weights=bool(wants & {"kl1", "kl2"}))
        if len(ensemble) == 0:
            return
        meta = ensemble.metadata
        key = {k: meta[k] for k in ("d", "L", "gamma", "geometry")}
        self.logger.info(f"Analyzing {len(ensemble)} spectra for {_tag(meta)}")

        if "gap_ratio" in wants:
            mean, err = mean_gap_ratio(ensemble)
            self.tables["gap_ratio"].append(dict(key, mean=mean, stderr=err, n=len(ensemble)))
            ratios = [gap_ratios(s).r_tilde for s in ensemble]
            self._samples("gap_ratio", key, _trajectory_ids(ensemble),
                          [r.mean() if r.size else np.nan for r in ratios])

        if "r_distribution" in wants:
            dist = r_distribution(ensemble, bins=self.config.get("r_bins", Config.R_HIST_BINS))
            frame = pd.DataFrame({"r": dist.centers, "density": dist.density,
                                  "poisson": dist.poisson, "gue": dist.gue})
            self._write(frame, f"r_distribution_{_tag(meta)}.csv", dict(key, n_ratios=dist.n_total))
            self.tables["r_distribution_summary"].append(
                dict(key, n_ratios=dist.n_total, chi2_poisson=dist.chi2_poisson, chi2_gue=dist.chi2_gue))

        if wants & {"kl1", "kl2"}:
            self._divergences(ensemble, key, wants)

        if wants & {"sff", "thouless"}:
            unfolded = unfold(ensemble)
            sff = spectral_form_factor(unfolded, eta=self.config["eta"])
            if "sff" in wants:
                self._write(sff.to_frame(), f"sff_{_tag(meta)}.csv",
                            dict(key, heisenberg_time=sff.heisenberg_time, unfolding=unfolded.method))
            if "thouless" in wants:
                tau, err = thouless_time_blocks(unfolded, eta=self.config["eta"],
                                                tolerance=self.config["thouless_tolerance"],
                                                smoothing=self.config["thouless_smoothing"],
                                                noise_sigmas=self.config["thouless_noise_sigmas"])
                self.tables["thouless"].append(dict(key, mean=tau.tau, stderr=err, converged=tau.converged,
                                                    n=len(ensemble)))

        if "dos" in wants:
            dos = density_of_states(ensemble, bins=self.config["dos_bins"], energy_range=self.config["dos_range"])
            self._write(dos.to_frame(), f"dos_{_tag(meta)}.csv", key)
            self.tables["dos_summary"].append(dict(
                key, n_levels=dos.n_levels, below=dos.below, above=dos.above, saturated=dos.saturated,
                mean_energy=dos.mean_energy, asymmetry_sigma=dos.asymmetry()))

    def _divergences(self, ensemble: SpectralEnsemble, key: Dict, wants: set) -> None:
        if not ensemble.has_eigenvectors:
            self.logger.warning(f"No eigenvectors stored for {_tag(key)}; skipping KL diagnostics")
            return
        if "kl1" in wants:
            values = [kl1(s, ensemble.linear_size) for s in ensemble]
            mean, err, n = _mean_stderr(values)
            self._samples("kl1", key, _trajectory_ids(ensemble), values)
            self.tables["kl1"].append(dict(key, mean=mean, stderr=err, n=n))
        if "kl2" in wants:
            if len(ensemble) < 2:
                self.logger.warning(f"KL2 needs two spectra; skipping {_tag(key)}")
                return
            # one snapshot per trajectory keeps pairs across realizations
            first = {}
            for s in ensemble:
                first.setdefault(s.metadata.get("trajectory_id"), s)
            members = SpectralEnsemble(list(first.values()), dict(ensemble.metadata))
            if len(members) < 2:
                members = ensemble
            values = kl2_values(members, matching=self.config.get("kl2_matching", "rank"))
            mean, err, n = _mean_stderr(values)
            self.tables["kl2"].append(dict(key, mean=mean, stderr=err, n=n))
            self._samples("kl2", key, _trajectory_ids(members)[0::2][:len(values)], values)

    # entropy diagnostics

    def _analyze_observables(self, path: str, half_cut: Dict[tuple, List[float]]) -> None:
        frame, header = storage.load_observables(path)
        d, size, gamma = int(header["d"]), int(header["L"]), float(header["gamma"])
        key = {"d": d, "L": size, "gamma": gamma}
        wants = set(self.diagnostics)

        curve = frame[frame["observable"] == "entropy_curve"]
        if "entropy_curve" in wants and len(curve):
            table = curve.pivot_table(index=["trajectory_id", "snapshot"], columns="x", values="value")
            series = density_curve_from_entropies(table.to_numpy(), table.columns.to_numpy(), size, metadata=key)
            self._write(series.to_frame(), f"entropy_curve_d{d}_L{size}_{storage.gamma_key(gamma)}.csv", key)
            for law in LAWS:
                try:
                    fit = fit_scaling_law(series, law, size, offset_match=(law == "page"))
                except ValueError as e:
                    self.logger.warning(f"{law} fit skipped for L={size}, gamma={gamma}: {str(e)}")
                    continue
                self.tables["scaling_fits"].append(dict(key, **fit.as_row()))

        halves = frame[frame["observable"] == "half_cut_entropy"]
        if len(halves):
            samples = halves.pivot_table(index="trajectory_id", columns="snapshot", values="value")
            half_cut[(d, gamma)].append((size, float(np.nanmean(samples.to_numpy()))))
            if "entropy_dynamics" in wants:
                times = halves.groupby("snapshot")["time"].first().to_numpy()
                series = time_series(times, samples.to_numpy(), size, key)
                self._write(series.to_frame(), f"entropy_dynamics_d{d}_L{size}_{storage.gamma_key(gamma)}.csv", key)
                _, z = check_stationarity(samples.to_numpy())
                for law in ("linear", "logarithmic"):
                    try:
                        fit = fit_growth_law(times, series.mean * size, law)
                    except ValueError as e:
                        self.logger.warning(f"{law} growth fit skipped: {str(e)}")
                        continue
                    self.tables["growth_fits"].append(dict(key, stationarity_sigma=z, **fit.as_row()))

        mutual = frame[frame["observable"] == "mutual_information"]
        if "mutual_information" in wants and len(mutual):
            per_trajectory = mutual.groupby("trajectory_id")["value"].mean()
            mean, err, n = _mean_stderr(per_trajectory.to_numpy())
            self.tables["mutual_information"].append(dict(key, mean=mean, stderr=err, n=n))
            self._samples("mutual_information", key, per_trajectory.index.to_numpy(), per_trajectory.to_numpy())

    def _prefactor(self, half_cut: Dict[tuple, List]) -> None:
        for (d, gamma), entries in sorted(half_cut.items()):
            entropies = dict(entries)
            if len(entropies) < 3:
                self.logger.warning(f"Prefactor at gamma={gamma} needs 3 sizes, have {len(entropies)}")
                continue
            result = prefactor_extraction(entropies)
            for size, c, b in zip(result.sizes, result.c, result.b):
                self.tables["prefactor"].append({"d": d, "gamma": gamma, "L": int(size), "c": c, "b": b,
                                                 "c_infinity": result.c_infinity})

    # output

    def _samples(self, name: str, key: Dict, trajectory_ids, values) -> None:
        """Per-trajectory means behind one report row, written to <name>_samples.csv."""
        frame = pd.DataFrame({"trajectory_id": trajectory_ids, "value": values}).dropna()
        for trajectory_id, value in frame.groupby("trajectory_id")["value"].mean().items():
            self.tables[f"{name}_samples"].append(dict(key, trajectory_id=int(trajectory_id), value=float(value)))

    def _write(self, frame: pd.DataFrame, name: str, metadata: Dict) -> None:
        path = os.path.join(self.output_dir, name)
        provenance.write_csv(frame, path, dict(metadata, sources=",".join(self.sources)))
        self.written.append(path)

    def _flush(self) -> None:
        for name, rows in sorted(self.tables.items()):
            frame = pd.DataFrame(rows)
            order = [c for c in ("d", "L", "gamma", "geometry", "law", "trajectory_id") if c in frame.columns]
            frame = frame.sort_values(order).reset_index(drop=True)
            self._write(frame, f"{name}.csv", {"report": name})


def analyze(directories: Sequence[str], diagnostics: Sequence[str], output_dir: str,
            config: Optional[Dict] = None) -> List[str]:
    """Run the analysis stage; returns the written report paths."""
    return Analyzer(directories, diagnostics, output_dir, config).run()
