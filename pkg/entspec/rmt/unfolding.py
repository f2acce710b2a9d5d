"""
Spectral unfolding with a trajectory-averaged cumulative level count.
"""
from dataclasses import dataclass
from typing import Callable, List
import logging

import numpy as np
from scipy.interpolate import LSQUnivariateSpline, PchipInterpolator

from ..spectrum.hamiltonian import EntanglementSpectrum
from .ensemble import SpectralEnsemble

logger = logging.getLogger(__name__)

MIN_KNOTS = 10
LEVELS_PER_KNOT = 50
PROJECTION_GRID = 4096


@dataclass
class UnfoldedEnsemble:
    """Unfolded unsaturated levels per spectrum and the staircase fit used."""

    levels: List[np.ndarray]
    staircase: Callable[[np.ndarray], np.ndarray]
    method: str
    metadata: dict

    def __len__(self) -> int:
        return len(self.levels)

    def mean_spacing(self) -> float:
        spacings = [np.diff(lv) for lv in self.levels if lv.size > 1]
        return float(np.concatenate(spacings).mean()) if spacings else np.nan


def averaged_staircase(ensemble_levels: List[np.ndarray]):
    """
    Cumulative count C(e) averaged over trajectories, on the pooled unique grid.
    """
    pooled = np.sort(np.concatenate(ensemble_levels))
    grid, counts = np.unique(pooled, return_counts=True)
    return grid, np.cumsum(counts) / len(ensemble_levels)


def _linear_staircase(grid: np.ndarray, staircase: np.ndarray):
    return lambda e: np.interp(e, grid, staircase)


def _spline_staircase(grid: np.ndarray, staircase: np.ndarray, n_knots: int):
    """Least-squares cubic spline whose derivative is projected onto >= 0."""
    quantiles = np.linspace(0.0, 1.0, n_knots + 2)[1:-1]
    knots = np.unique(np.quantile(grid, quantiles))
    knots = knots[(knots > grid[0]) & (knots < grid[-1])]
    spline = LSQUnivariateSpline(grid, staircase, knots, k=3)

    dense = np.linspace(grid[0], grid[-1], max(PROJECTION_GRID, 4 * grid.size))
    slope = np.clip(spline.derivative()(dense), 0.0, None)
    steps = 0.5 * (slope[1:] + slope[:-1]) * np.diff(dense)
    values = float(spline(grid[0])) + np.concatenate([[0.0], np.cumsum(steps)])
    monotone = PchipInterpolator(dense, values, extrapolate=True)

    if np.any(np.diff(monotone(grid)) < 0):
        raise ValueError("Unfolding staircase is not monotone after projection")
    return monotone


def unfold(ensemble: SpectralEnsemble) -> UnfoldedEnsemble:
    """
    Map every spectrum through a smooth fit of the averaged cumulative count.

    The spline uses max(10, ceil(M/50)) interior knots with M the mean number of
    levels per spectrum; on failure the piecewise-linear staircase is used.
    """
    if len(ensemble) == 0:
        raise ValueError("Unfolding needs at least one spectrum")
    levels = [np.sort(s.unsaturated_energies) for s in ensemble]
    if sum(lv.size for lv in levels) == 0:
        raise ValueError("Unfolding needs at least one unsaturated level")

    grid, staircase = averaged_staircase(levels)
    mean_levels = np.mean([lv.size for lv in levels])
    n_knots = max(MIN_KNOTS, int(np.ceil(mean_levels / LEVELS_PER_KNOT)))

    method = "spline"
    try:
        if grid.size < n_knots + 4:
            raise ValueError(f"Only {grid.size} distinct levels for {n_knots} knots")
        fit = _spline_staircase(grid, staircase, n_knots)
    except ValueError as e:
        logger.warning(f"Spline unfolding failed ({str(e)}); using piecewise-linear staircase")
        fit = _linear_staircase(grid, staircase)
        method = "linear"

    unfolded = [np.asarray(fit(lv), dtype=float) for lv in levels]
    return UnfoldedEnsemble(levels=unfolded, staircase=fit, method=method, metadata=dict(ensemble.metadata))


def unfold_levels(levels: List[np.ndarray], **metadata) -> UnfoldedEnsemble:
    """Unfold raw level arrays (e.g. synthetic or already unfolded spectra)."""
    spectra = [
        EntanglementSpectrum(np.sort(lv), np.zeros(len(lv)), np.zeros(len(lv), dtype=bool),
                             metadata={"trajectory_id": i})
        for i, lv in enumerate(levels)
    ]
    return unfold(SpectralEnsemble(spectra, dict(metadata)))
