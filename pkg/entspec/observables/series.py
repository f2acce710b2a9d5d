"""
Ensemble-averaged observable series and entanglement-density curves.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple
import logging

import numpy as np
import pandas as pd

from .. import provenance
from ..geometry.lattice import LatticeSpec
from ..geometry.masks import strip_sweep
from .gaussian import entanglement_entropy

logger = logging.getLogger(__name__)

ABSCISSAE = ("l_A", "t", "gamma", "L")


@dataclass
class ObservableSeries:
    """Sampled observable as (x, mean, stderr, count) rows."""

    abscissa: str
    x: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    count: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.abscissa not in ABSCISSAE:
            raise ValueError(f"Unknown abscissa '{self.abscissa}'. Valid: {', '.join(ABSCISSAE)}")
        self.x = np.asarray(self.x, dtype=float)
        self.mean = np.asarray(self.mean, dtype=float)
        self.stderr = np.asarray(self.stderr, dtype=float)
        self.count = np.asarray(self.count, dtype=int)

    @classmethod
    def from_samples(cls, abscissa: str, x: Sequence[float], samples: np.ndarray,
                     metadata: Optional[Dict[str, Any]] = None) -> "ObservableSeries":
        """Build from a (n_samples, n_x) array; NaN entries are ignored."""
        samples = np.atleast_2d(np.asarray(samples, dtype=float))
        count = np.sum(~np.isnan(samples), axis=0)
        mean = np.nanmean(samples, axis=0)
        stderr = standard_error(samples)
        return cls(abscissa, np.asarray(x), mean, stderr, count, dict(metadata or {}))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"x": self.x, "mean": self.mean, "stderr": self.stderr, "n_samples": self.count})

    def to_csv(self, path: str) -> str:
        meta = dict(self.metadata)
        meta["abscissa"] = self.abscissa
        return provenance.write_csv(self.to_frame(), path, meta)

    @classmethod
    def read_csv(cls, path: str) -> "ObservableSeries":
        frame, header = provenance.read_csv(path)
        abscissa = header.pop("abscissa", "l_A")
        return cls(abscissa, frame["x"].values, frame["mean"].values,
                   frame["stderr"].values, frame["n_samples"].values, header)

    def offset(self, at: float) -> "ObservableSeries":
        """Subtract the mean value at abscissa `at`."""
        idx = int(np.argmin(np.abs(self.x - at)))
        return ObservableSeries(self.abscissa, self.x, self.mean - self.mean[idx],
                                self.stderr, self.count, dict(self.metadata, offset_at=at))


def standard_error(samples: np.ndarray) -> np.ndarray:
    """Column-wise sample std / sqrt(count); NaN where fewer than two samples."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    count = np.sum(~np.isnan(samples), axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        centered = samples - np.nanmean(samples, axis=0)
        var = np.nansum(centered ** 2, axis=0) / (count - 1)
        err = np.sqrt(var / count)
    return np.where(count >= 2, err, np.nan)


def density_curve_from_entropies(entropies: np.ndarray, widths: Sequence[int], size: int,
                                 offset: bool = False,
                                 metadata: Optional[Dict[str, Any]] = None) -> ObservableSeries:
    """
    Entanglement density s = <S>/L from a (n_samples, n_widths) entropy array.

    Entropies are averaged first, then divided by L.
    """
    series = ObservableSeries.from_samples("l_A", widths, np.asarray(entropies) / size, metadata)
    if offset:
        series = series.offset(size / 2)
    return series


def entanglement_density_curve(states: Iterable, lattice: LatticeSpec,
                               widths: Optional[Sequence[int]] = None,
                               offset: bool = False) -> ObservableSeries:
    """
    Entanglement density curve s(l_A) over strips l_A x L^(d-1).

    Args:
        states: Iterable of TrajectoryState or wavefunction matrices
        lattice: Lattice the states live on
        widths: Strip widths (default 1 .. L-1)
        offset: Subtract the value at l_A = L/2
    """
    masks = strip_sweep(lattice, widths)
    widths = [m.params["width"] for m in masks]
    entropies = np.array([[entanglement_entropy(state, m) for m in masks] for state in states])
    if entropies.size == 0:
        raise ValueError("Entanglement density curve needs at least one state")
    meta = {"d": lattice.dimension, "L": lattice.size, "geometry": "strip"}
    return density_curve_from_entropies(entropies, widths, lattice.size, offset, meta)


def time_series(times: Sequence[float], samples: np.ndarray, size: int,
                metadata: Optional[Dict[str, Any]] = None) -> ObservableSeries:
    """Entropy density s(t) from a (n_trajectories, n_times) entropy array."""
    return ObservableSeries.from_samples("t", times, np.asarray(samples) / size, metadata)


def check_stationarity(samples: np.ndarray, n_sigma: float = 2.0) -> Tuple[bool, float]:
    """
    Compare the first and second half of a sampling window.

    Args:
        samples: (n_trajectories, n_times) scalar observable
        n_sigma: Allowed difference in combined standard errors

    Returns:
        (stationary, difference in units of the combined standard error)
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    n_times = samples.shape[1]
    if n_times < 2:
        return True, 0.0
    half = n_times // 2
    first = samples[:, :half].mean(axis=1)
    second = samples[:, half:].mean(axis=1)
    if first.size < 2:
        return True, 0.0
    err = np.hypot(first.std(ddof=1) / np.sqrt(first.size), second.std(ddof=1) / np.sqrt(second.size))
    diff = abs(second.mean() - first.mean())
    if err == 0.0:
        return diff == 0.0, 0.0 if diff == 0.0 else np.inf
    z = diff / err
    return bool(z < n_sigma), float(z)
