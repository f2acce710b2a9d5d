"""
Calibration ensembles (GUE, Poisson) written in the simulate output format.
"""
from dataclasses import dataclass
from datetime import datetime
import json
import os
from typing import List
import logging

from .. import __version__
from ..config import resolve_output_dir
from ..dynamics.trajectory import Snapshot
from ..exceptions import ConfigError
from ..models import OutputFile, RunRecord, STATUS_COMPLETE, get_engine, get_session
from ..provenance import config_hash
from ..rmt.synthetic import SYNTHETIC_KINDS, synthetic_ensemble
from . import storage

logger = logging.getLogger(__name__)


@dataclass
class SyntheticSummary:
    directory: str
    config_hash: str
    outputs: List[str]


def write_synthetic(kind: str, n_levels: int, n_samples: int, directory: str, seed: int = 0,
                    keep_eigenvectors: bool = True) -> SyntheticSummary:
    """
    Draw a synthetic ensemble and persist it with a complete manifest.

    Args:
        kind: 'gue' or 'poisson'
        n_levels: Levels per spectrum (also used as L)
        n_samples: Number of spectra, one per pseudo-trajectory
        directory: Output directory (relative paths resolve against the output root)
        seed: Master seed
        keep_eigenvectors: Store |psi|^2 weights for the KL diagnostics
    """
    if kind not in SYNTHETIC_KINDS:
        raise ConfigError(f"Unknown synthetic ensemble '{kind}'. Valid: {', '.join(SYNTHETIC_KINDS)}")
    if n_levels < 3 or n_samples < 1:
        raise ConfigError("Synthetic ensembles need at least 3 levels and 1 sample")

    settings = {"synthetic": {"kind": kind, "n_levels": n_levels, "n_samples": n_samples,
                              "seed": seed, "keep_eigenvectors": keep_eigenvectors}}
    digest = config_hash(settings)
    directory = resolve_output_dir(directory)

    ensemble = synthetic_ensemble(kind, n_levels, n_samples, seed, keep_eigenvectors)
    token = f"synthetic_{kind}"
    observer = storage.SPECTRUM_PREFIX + token
    snapshots = []
    for spectrum in ensemble:
        if keep_eigenvectors:
            spectrum.weights = spectrum.probability_densities
            spectrum.eigenvectors = None
        snapshots.append(Snapshot(time=0.0, trajectory_id=spectrum.metadata["trajectory_id"], gamma=0.0,
                                  seed=seed, observations={observer: spectrum}))

    frame, weights = storage.spectra_frame(snapshots, observer)
    metadata = {"config_hash": digest, "seed": seed, "d": 0, "L": n_levels, "dt": 0.0,
                "lattice": "none", "initial_state": "none", "geometry": token, "mask": ""}
    entries = storage.write_spectra(directory, 0.0, token, frame, weights, metadata)

    engine = get_engine(directory)
    try:
        with get_session(engine) as session:
            other = session.query(RunRecord).filter(RunRecord.config_hash != digest).first()
            if other is not None:
                raise ConfigError(f"{directory} already holds a different run ({other.config_hash[:12]})")
            run = session.query(RunRecord).filter_by(config_hash=digest).first()
            if run is None:
                run = RunRecord(config_hash=digest, code_version=__version__, master_seed=seed,
                                config_json=json.dumps(settings, sort_keys=True))
                session.add(run)
                session.flush()
            session.query(OutputFile).filter_by(run_id=run.id).delete()
            outputs = []
            for path, kind_, checksum, n_rows in entries:
                rel = os.path.relpath(path, directory)
                session.add(OutputFile(run_id=run.id, path=rel, kind=kind_, checksum=checksum, n_rows=n_rows))
                outputs.append(rel)
            run.status = STATUS_COMPLETE
            run.completed_at = datetime.now()
    finally:
        engine.dispose()

    logger.info(f"Wrote {n_samples} synthetic {kind} spectra ({n_levels} levels) to {directory}")
    return SyntheticSummary(directory, digest, outputs)
