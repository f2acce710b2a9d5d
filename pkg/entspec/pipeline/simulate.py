"""
Ensemble runner: executes trajectories in parallel, persists per-trajectory
chunks with completion records, and consolidates them into data files.
"""
from contextlib import nullcontext
from dataclasses import dataclass, field
from datetime import datetime
import os
from typing import Any, Dict, List, Tuple
import logging

import numpy as np
from joblib import Parallel, delayed
from threadpoolctl import threadpool_limits
from tqdm import tqdm

from .. import __version__
from ..config import resolve_output_dir
from ..dynamics.observers import (
    EntropyObserver, MutualInformationObserver, Observer, OccupationObserver, SpectrumObserver,
)
from ..dynamics.trajectory import Snapshot, TrajectoryEngine
from ..exceptions import ConfigError
from ..geometry.lattice import LatticeSpec, build_lattice
from ..geometry.masks import make_mask, parse_geometry, strip_sweep
from ..models import (
    OutputFile, RunRecord, TrajectoryRecord, STATUS_COMPLETE, STATUS_INCOMPLETE, STATUS_RUNNING,
    get_engine, get_session,
)
from ..observables.gaussian import entropy_from_eigenvalues
from ..observables.series import check_stationarity
from . import storage
from .run_config import RunConfig

logger = logging.getLogger(__name__)


@dataclass
class SimulationSummary:
    """Outcome of one simulate call."""

    directory: str
    config_hash: str
    trajectories_run: int = 0
    trajectories_resumed: int = 0
    outputs: List[str] = field(default_factory=list)
    stationarity: Dict[str, float] = field(default_factory=dict)


def build_observers(config: RunConfig, lattice: LatticeSpec, gamma: float) -> List[Observer]:
    """Observers requested by a run configuration."""
    wanted = config.observables
    meta = {"d": lattice.dimension, "L": lattice.size, "gamma": gamma}
    observers: List[Observer] = []
    if "spectrum" in wanted.observables:
        for token in wanted.geometries:
            observers.append(SpectrumObserver(storage.SPECTRUM_PREFIX + token, parse_geometry(lattice, token),
                                              keep_eigenvectors=wanted.keep_eigenvectors, metadata=meta))
    if "entropy_curve" in wanted.observables:
        observers.append(EntropyObserver("entropy_curve", strip_sweep(lattice)))
    if "half_cut_entropy" in wanted.observables:
        observers.append(EntropyObserver("half_cut_entropy", [make_mask(lattice, "half_cut")]))
    if "mutual_information" in wanted.observables:
        observers.append(MutualInformationObserver(
            "mutual_information",
            make_mask(lattice, "strip", width=1),
            make_mask(lattice, "strip", width=1, offset=lattice.size // 2),
        ))
    if "occupations" in wanted.observables:
        observers.append(OccupationObserver("occupations"))
    return observers


def simulate_trajectory(config: RunConfig, gamma: float, trajectory_id: int,
                        limit_threads: bool = False) -> Tuple[int, List[Snapshot]]:
    """Worker entry point: one trajectory at one monitoring rate."""
    with threadpool_limits(limits=1) if limit_threads else nullcontext():
        lattice, hopping = build_lattice(config.lattice.dimension, config.lattice.size)
        engine = TrajectoryEngine(lattice, hopping, config.evolution_config(gamma))
        observers = build_observers(config, lattice, gamma)
        return trajectory_id, engine.run_trajectory(trajectory_id, config.ensemble.seed, observers)


class EnsembleRunner:
    """Runs every (gamma, trajectory) of a RunConfig and writes the ensemble directory."""

    def __init__(self, config: RunConfig, workers: int = None, show_progress: bool = True):
        """
        Initialize with configuration.

        Args:
            config: Validated run configuration
            workers: Override for the worker count of the config
            show_progress: Display a progress bar per monitoring rate
        """
        self.config = config
        self.workers = workers or config.ensemble.workers
        self.show_progress = show_progress
        self.directory = resolve_output_dir(config.output.directory)
        self.lattice, _ = build_lattice(config.lattice.dimension, config.lattice.size)
        self.logger = logging.getLogger("EnsembleRunner")

    def _metadata(self) -> Dict[str, Any]:
        cfg = self.config
        return {
            "config_hash": cfg.config_hash(),
            "seed": cfg.ensemble.seed,
            "d": cfg.lattice.dimension,
            "L": cfg.lattice.size,
            "dt": cfg.evolution.dt,
            "lattice": self.lattice.descriptor(),
            "initial_state": cfg.evolution.initial_state,
        }

    def _open_run(self, session) -> RunRecord:
        digest = self.config.config_hash()
        other = session.query(RunRecord).filter(RunRecord.config_hash != digest).first()
        if other is not None:
            raise ConfigError(f"{self.directory} already holds a different run ({other.config_hash[:12]})")
        run = session.query(RunRecord).filter_by(config_hash=digest).first()
        if run is None:
            run = RunRecord(config_hash=digest, code_version=__version__,
                            master_seed=self.config.ensemble.seed, config_json=self.config.to_json())
            session.add(run)
            session.flush()
        run.status = STATUS_RUNNING
        return run

    def run(self) -> SimulationSummary:
        """
        Execute all missing trajectories and consolidate outputs.

        Returns:
            SimulationSummary
        """
        engine = get_engine(self.directory)
        summary = SimulationSummary(self.directory, self.config.config_hash())
        try:
            with get_session(engine) as session:
                run_id = self._open_run(session).id

            for gamma in self.config.evolution.gammas:
                self._run_gamma(engine, run_id, gamma, summary)

            with get_session(engine) as session:
                run = session.get(RunRecord, run_id)
                run.status = STATUS_COMPLETE
                run.completed_at = datetime.now()

            self.logger.info(f"Ensemble complete in {self.directory}: {summary.trajectories_run} run, "
                             f"{summary.trajectories_resumed} resumed, {len(summary.outputs)} files")
            return summary

        except Exception as e:
            self.logger.error(f"Simulation failed: {str(e)}")
            with get_session(engine) as session:
                run = session.query(RunRecord).filter_by(config_hash=summary.config_hash).first()
                if run is not None:
                    run.status = STATUS_INCOMPLETE
            raise
        finally:
            engine.dispose()

    def _run_gamma(self, engine, run_id: int, gamma: float, summary: SimulationSummary) -> None:
        n_traj = self.config.ensemble.trajectories
        with get_session(engine) as session:
            done = {
                rec.trajectory_id for rec in session.query(TrajectoryRecord).filter_by(
                    run_id=run_id, gamma=gamma, status=STATUS_COMPLETE)
            }
        pending = [i for i in range(n_traj) if i not in done]
        summary.trajectories_resumed += len(done)
        if done:
            self.logger.info(f"gamma={gamma}: resuming, {len(done)} of {n_traj} trajectories already complete")

        if pending:
            results = Parallel(n_jobs=self.workers, return_as="generator")(
                delayed(simulate_trajectory)(self.config, gamma, i, self.workers > 1) for i in pending
            )
            progress = tqdm(results, total=len(pending), desc=f"gamma={gamma:g}", disable=not self.show_progress)
            for trajectory_id, snapshots in progress:
                path, checksum = storage.write_chunk(self.directory, gamma, trajectory_id, snapshots)
                with get_session(engine) as session:
                    session.add(TrajectoryRecord(
                        run_id=run_id, gamma=gamma, trajectory_id=trajectory_id,
                        seed_key=f"{self.config.ensemble.seed}:{trajectory_id}",
                        status=STATUS_COMPLETE, chunk_path=os.path.relpath(path, self.directory),
                        checksum=checksum,
                    ))
                summary.trajectories_run += 1

        self._consolidate(engine, run_id, gamma, summary)

    def _consolidate(self, engine, run_id: int, gamma: float, summary: SimulationSummary) -> None:
        """Merge chunks of one gamma into sorted data files and register them."""
        with get_session(engine) as session:
            records = session.query(TrajectoryRecord).filter_by(
                run_id=run_id, gamma=gamma, status=STATUS_COMPLETE).order_by(TrajectoryRecord.trajectory_id).all()
            paths = [os.path.join(self.directory, rec.chunk_path) for rec in records]
        snapshots: List[Snapshot] = []
        for path in paths:
            snapshots.extend(storage.read_chunk(path))
        if not snapshots:
            self.logger.info(f"gamma={gamma}: no snapshots recorded, nothing to consolidate")
            return

        metadata = self._metadata()
        entries = []
        spectra = {}
        for token in self.config.observables.geometries if "spectrum" in self.config.observables.observables else []:
            mask = parse_geometry(self.lattice, token)
            frame, weights = storage.spectra_frame(snapshots, storage.SPECTRUM_PREFIX + token)
            if len(frame):
                spectra[token] = frame
                meta = dict(metadata, geometry=mask.geometry, mask=mask.descriptor())
                entries.extend(storage.write_spectra(self.directory, gamma, token, frame, weights, meta))

        observables = storage.observables_frame(snapshots, self.lattice.size)
        if len(observables):
            entries.append(storage.write_observables(self.directory, gamma, observables, metadata))
        series = _scalar_series(observables) if len(observables) else {}
        if not series:
            series = {f"spectrum_entropy:{token}": _spectrum_entropy_series(table)
                      for token, table in spectra.items()}
        self._check_stationarity(series, gamma, summary)

        with get_session(engine) as session:
            for path, kind, checksum, n_rows in entries:
                rel = os.path.relpath(path, self.directory)
                session.query(OutputFile).filter_by(run_id=run_id, path=rel).delete()
                session.add(OutputFile(run_id=run_id, path=rel, kind=kind, checksum=checksum, n_rows=n_rows))
                summary.outputs.append(rel)

    def _check_stationarity(self, series: Dict[str, np.ndarray], gamma: float, summary: SimulationSummary) -> None:
        if self.config.evolution.initial_state == "neel" and self.config.evolution.burn_in == 0:
            return  # dynamics runs are not meant to be stationary
        for name, samples in sorted(series.items()):
            stationary, z = check_stationarity(samples)
            summary.stationarity[f"{name}@{gamma:g}"] = z
            if not stationary:
                self.logger.warning(f"gamma={gamma}: {name} drifts between halves of the sampling window "
                                    f"({z:.1f} standard errors); consider a longer burn-in")


def _scalar_series(frame) -> Dict[str, np.ndarray]:
    """(trajectories, snapshots) tables of the scalar observables in an observables frame."""
    scalar = frame[frame["observable"].isin(["half_cut_entropy", "mutual_information"])]
    return {
        name: group.pivot_table(index="trajectory_id", columns="snapshot", values="value").to_numpy()
        for name, group in scalar.groupby("observable")
    }


def _spectrum_entropy_series(frame) -> np.ndarray:
    """Entanglement entropy per (trajectory, snapshot) rebuilt from stored occupations."""
    occupations = frame.assign(occupation=frame["occupation"].clip(0.0, 1.0))
    entropies = occupations.groupby(["trajectory_id", "snapshot"])["occupation"].apply(
        lambda lam: entropy_from_eigenvalues(lam.to_numpy()))
    return entropies.unstack("snapshot").to_numpy()


def simulate(config: RunConfig, workers: int = None, show_progress: bool = True) -> SimulationSummary:
    """Run an ensemble described by a RunConfig."""
    return EnsembleRunner(config, workers, show_progress).run()
