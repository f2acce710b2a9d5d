"""
Density of entanglement states pooled over an ensemble.
"""
from dataclasses import dataclass
from typing import Iterable, Tuple
import logging

import numpy as np
import pandas as pd

from ..config import Config
from .hamiltonian import EntanglementSpectrum

logger = logging.getLogger(__name__)


@dataclass
class DensityOfStates:
    """Normalized histogram of pooled unsaturated entanglement energies."""

    edges: np.ndarray
    density: np.ndarray
    n_levels: int
    below: int
    above: int
    saturated: int
    mean_energy: float
    mean_stderr: float

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    def asymmetry(self) -> float:
        """|mean energy| in units of its standard error."""
        if not np.isfinite(self.mean_stderr) or self.mean_stderr == 0:
            return 0.0
        return abs(self.mean_energy) / self.mean_stderr

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"energy": self.centers, "density": self.density})


def density_of_states(spectra: Iterable[EntanglementSpectrum], bins: int = Config.DOS_BINS,
                      energy_range: Tuple[float, float] = Config.DOS_RANGE) -> DensityOfStates:
    """
    Histogram nu_A(eps) over pooled energies, integrating to one over the bins.

    Saturated levels and energies outside the range are counted separately.
    """
    if bins is None or bins < 1:
        raise ValueError(f"Density of states needs at least one bin, got {bins}")
    lo, hi = energy_range
    if not hi > lo:
        raise ValueError(f"Empty energy range {energy_range}")

    spectra = list(spectra)
    if not spectra:
        raise ValueError("Density of states needs a non-empty ensemble")

    pooled = np.concatenate([s.unsaturated_energies for s in spectra])
    saturated = sum(s.n_saturated for s in spectra)
    below = int(np.count_nonzero(pooled < lo))
    above = int(np.count_nonzero(pooled > hi))
    inside = pooled[(pooled >= lo) & (pooled <= hi)]

    edges = np.linspace(lo, hi, bins + 1)
    if inside.size:
        density, _ = np.histogram(inside, bins=edges, density=True)
    else:
        logger.warning("No entanglement levels inside the density-of-states range")
        density = np.zeros(bins)

    stderr = pooled.std(ddof=1) / np.sqrt(pooled.size) if pooled.size > 1 else np.nan
    return DensityOfStates(edges, density, int(pooled.size), below, above, saturated,
                           float(pooled.mean()) if pooled.size else np.nan, float(stderr))
