"""
On-disk layout of an ensemble directory.

    <dir>/manifest.db
    <dir>/chunks/gamma_<g>/traj_<id>.joblib     per-trajectory snapshots (resume)
    <dir>/gamma_<g>/spectra_<geometry>.csv      trajectory_id, snapshot, time, alpha, energy, ...
    <dir>/gamma_<g>/eigenweights_<geometry>.npy |psi_a(i)|^2, little-endian float64, (snapshots, |A|, M)
    <dir>/gamma_<g>/observables.csv             trajectory_id, snapshot, time, observable, x, value
"""
import os
from typing import Any, Dict, List, Optional, Tuple
import logging

import joblib
import numpy as np
import pandas as pd

from .. import provenance
from ..dynamics.trajectory import Snapshot
from ..geometry.lattice import build_lattice
from ..geometry.masks import mask_from_descriptor
from ..rmt.ensemble import SpectralEnsemble
from ..spectrum.hamiltonian import EntanglementSpectrum

logger = logging.getLogger(__name__)

SPECTRUM_PREFIX = "spectrum:"
WEIGHTS_DTYPE = "<f8"


def gamma_key(gamma: float) -> str:
    return f"gamma_{gamma:.6g}"


def geometry_key(token: str) -> str:
    """File-safe form of a geometry token ('strip:3' -> 'strip3')."""
    return token.replace(":", "").replace(" ", "_").replace("=", "")


def chunk_path(directory: str, gamma: float, trajectory_id: int) -> str:
    return os.path.join(directory, "chunks", gamma_key(gamma), f"traj_{trajectory_id:06d}.joblib")


def write_chunk(directory: str, gamma: float, trajectory_id: int, snapshots: List[Snapshot]) -> Tuple[str, str]:
    """Persist one trajectory; returns (path, checksum)."""
    path = chunk_path(directory, gamma, trajectory_id)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    joblib.dump(snapshots, path)
    return path, provenance.file_checksum(path)


def read_chunk(path: str) -> List[Snapshot]:
    return joblib.load(path)


def spectra_frame(snapshots: List[Snapshot], observer: str) -> Tuple[pd.DataFrame, Optional[np.ndarray]]:
    """Flatten spectrum observations into a level table and a stacked weight array."""
    frames, weights = [], []
    for snapshot_index, snap in _indexed(snapshots):
        spectrum: EntanglementSpectrum = snap.observations[observer]
        n = spectrum.n_levels
        frames.append(pd.DataFrame({
            "trajectory_id": np.full(n, snap.trajectory_id),
            "snapshot": np.full(n, snapshot_index),
            "time": np.full(n, snap.time),
            "alpha": np.arange(n),
            "energy": spectrum.energies,
            "occupation": spectrum.occupations,
            "saturated": spectrum.saturated.astype(int),
        }))
        if spectrum.weights is not None:
            weights.append(spectrum.weights)
    frame = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()
    stacked = np.stack(weights).astype(WEIGHTS_DTYPE) if weights and len(weights) == len(frames) else None
    return frame, stacked


def observables_frame(snapshots: List[Snapshot], size: int) -> pd.DataFrame:
    """Long table of scalar and vector observations other than spectra."""
    rows = []
    for snapshot_index, snap in _indexed(snapshots):
        for name, value in sorted(snap.observations.items()):
            if name.startswith(SPECTRUM_PREFIX):
                continue
            values = np.atleast_1d(np.asarray(value, dtype=float))
            if name == "entropy_curve":
                xs = np.arange(1, values.size + 1)
            elif name == "half_cut_entropy":
                xs = np.array([size // 2])
            elif name == "mutual_information":
                xs = np.array([size // 2])
            else:
                xs = np.arange(values.size)
            for x, v in zip(xs, values):
                rows.append((snap.trajectory_id, snapshot_index, snap.time, name, int(x), float(v)))
    return pd.DataFrame(rows, columns=["trajectory_id", "snapshot", "time", "observable", "x", "value"])


def _indexed(snapshots: List[Snapshot]):
    """(per-trajectory snapshot index, snapshot) in (trajectory id, time) order."""
    counters: Dict[int, int] = {}
    for snap in sorted(snapshots, key=lambda s: (s.trajectory_id, s.time)):
        index = counters.get(snap.trajectory_id, 0)
        counters[snap.trajectory_id] = index + 1
        yield index, snap


def write_spectra(directory: str, gamma: float, token: str, frame: pd.DataFrame,
                  weights: Optional[np.ndarray], metadata: Dict[str, Any]) -> List[Tuple[str, str, str, int]]:
    """Write the level table (and weights); returns (path, kind, checksum, rows) entries."""
    folder = os.path.join(directory, gamma_key(gamma))
    os.makedirs(folder, exist_ok=True)
    key = geometry_key(token)
    path = os.path.join(folder, f"spectra_{key}.csv")
    meta = dict(metadata, gamma=gamma, geometry_token=token,
                weights=f"eigenweights_{key}.npy" if weights is not None else "none")
    entries = [(path, "spectra", provenance.write_csv(frame, path, meta), len(frame))]
    if weights is not None:
        weights_path = os.path.join(folder, f"eigenweights_{key}.npy")
        np.save(weights_path, np.ascontiguousarray(weights, dtype=WEIGHTS_DTYPE), allow_pickle=False)
        entries.append((weights_path, "eigenweights", provenance.file_checksum(weights_path), int(weights.shape[0])))
    return entries


def write_observables(directory: str, gamma: float, frame: pd.DataFrame,
                      metadata: Dict[str, Any]) -> Tuple[str, str, str, int]:
    folder = os.path.join(directory, gamma_key(gamma))
    os.makedirs(folder, exist_ok=True)
    path = os.path.join(folder, "observables.csv")
    return path, "observables", provenance.write_csv(frame, path, dict(metadata, gamma=gamma)), len(frame)


def _mask_sites(header: Dict[str, str], n_levels: int) -> np.ndarray:
    dimension, size = int(header.get("d", 0)), int(header.get("L", 0))
    descriptor = header.get("mask", "")
    if dimension >= 1 and descriptor:
        lattice, _ = build_lattice(dimension, size)
        return mask_from_descriptor(lattice, descriptor).sites
    return np.arange(n_levels)


def load_spectral_ensemble(path: str, with_weights: bool = True) -> SpectralEnsemble:
    """Rebuild a SpectralEnsemble from a spectra CSV (and its weight file, if any)."""
    frame, header = provenance.read_csv(path)
    weights = None
    weights_name = header.get("weights", "none")
    if with_weights and weights_name != "none":
        weights = np.load(os.path.join(os.path.dirname(path), weights_name), mmap_mode="r")

    base = {"d": int(header["d"]), "L": int(header["L"]), "gamma": float(header["gamma"]),
            "geometry": header.get("geometry", "")}
    spectra = []
    sites = None
    for row, ((trajectory_id, snapshot), group) in enumerate(frame.groupby(["trajectory_id", "snapshot"], sort=True)):
        group = group.sort_values("alpha")
        if sites is None:
            sites = _mask_sites(header, len(group))
        spectra.append(EntanglementSpectrum(
            energies=group["energy"].to_numpy(dtype=float),
            occupations=group["occupation"].to_numpy(dtype=float),
            saturated=group["saturated"].to_numpy(dtype=bool),
            sites=sites,
            weights=np.asarray(weights[row]) if weights is not None else None,
            metadata=dict(base, trajectory_id=int(trajectory_id), snapshot=int(snapshot),
                          time=float(group["time"].iloc[0])),
        ))
    return SpectralEnsemble(spectra, dict(base, source=path))


def load_observables(path: str) -> Tuple[pd.DataFrame, Dict[str, str]]:
    return provenance.read_csv(path)
