"""
Gap-ratio statistics and their Poisson / GUE references.
"""
from dataclasses import dataclass
from typing import Tuple, Union
import logging

import numpy as np

from ..config import Config
from ..spectrum.hamiltonian import EntanglementSpectrum
from .ensemble import SpectralEnsemble

logger = logging.getLogger(__name__)

POISSON_MEAN_R_TILDE = 0.38629
GUE_MEAN_R_TILDE = 0.60266

# Wigner-like surmise (r + r^2)^b / (1 + r + r^2)^(1 + 3b/2) with b = 2
GUE_BETA = 2
GUE_NORMALIZATION = 4.0 * np.pi / (81.0 * np.sqrt(3.0))


@dataclass
class GapRatios:
    """Consecutive-spacing ratios r and r_tilde = min(r, 1/r) of one spectrum."""

    r: np.ndarray
    r_tilde: np.ndarray
    skipped: int


@dataclass
class RDistribution:
    """Normalized histogram of pooled r with reference densities at bin centers."""

    edges: np.ndarray
    density: np.ndarray
    counts: np.ndarray
    n_total: int
    poisson: np.ndarray
    gue: np.ndarray
    chi2_poisson: float
    chi2_gue: float

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])


def poisson_r_density(r: np.ndarray) -> np.ndarray:
    """P(r) = 1/(1 + r)^2 for uncorrelated levels."""
    r = np.asarray(r, dtype=float)
    return 1.0 / (1.0 + r) ** 2


def gue_r_density(r: np.ndarray) -> np.ndarray:
    """Wigner-like surmise for the unitary class."""
    r = np.asarray(r, dtype=float)
    return (r + r ** 2) ** GUE_BETA / (1.0 + r + r ** 2) ** (1.0 + 1.5 * GUE_BETA) / GUE_NORMALIZATION


def _levels(spectrum: Union[EntanglementSpectrum, np.ndarray]) -> np.ndarray:
    if isinstance(spectrum, EntanglementSpectrum):
        return np.sort(spectrum.unsaturated_energies)
    return np.sort(np.asarray(spectrum, dtype=float))


def gap_ratios(spectrum: Union[EntanglementSpectrum, np.ndarray],
               tol: float = Config.DEGENERATE_SPACING) -> GapRatios:
    """
    r_a = (e_a - e_{a-1}) / (e_{a+1} - e_a) over unsaturated levels.

    Ratios involving a spacing below `tol` are skipped and counted.
    """
    levels = _levels(spectrum)
    if levels.size < 3:
        raise ValueError(f"Gap ratios need at least 3 usable levels, got {levels.size}")

    spacings = np.diff(levels)
    lower, upper = spacings[:-1], spacings[1:]
    valid = (lower > tol) & (upper > tol)
    skipped = int(np.count_nonzero(~valid))
    if skipped:
        logger.debug(f"Skipped {skipped} gap ratios with degenerate spacings")

    r = lower[valid] / upper[valid]
    return GapRatios(r=r, r_tilde=np.minimum(r, 1.0 / r), skipped=skipped)


def mean_gap_ratio(ensemble: SpectralEnsemble) -> Tuple[float, float]:
    """
    Average r_tilde within each spectrum, then across spectra.

    Returns:
        (mean, standard error from spectrum-to-spectrum scatter)
    """
    if len(ensemble) == 0:
        raise ValueError("Mean gap ratio needs a non-empty ensemble")
    per_spectrum = []
    for spectrum in ensemble:
        ratios = gap_ratios(spectrum)
        if ratios.r_tilde.size:
            per_spectrum.append(ratios.r_tilde.mean())
    if not per_spectrum:
        raise ValueError("No spectrum in the ensemble has a usable gap ratio")
    values = np.asarray(per_spectrum)
    stderr = values.std(ddof=1) / np.sqrt(values.size) if values.size > 1 else np.nan
    return float(values.mean()), float(stderr)


def _chi2_per_dof(counts: np.ndarray, expected: np.ndarray, min_expected: float = 5.0) -> float:
    keep = expected >= min_expected
    if np.count_nonzero(keep) < 2:
        return np.nan
    chi2 = np.sum((counts[keep] - expected[keep]) ** 2 / expected[keep])
    return float(chi2 / (np.count_nonzero(keep) - 1))


def r_distribution(ensemble: SpectralEnsemble, bins: int = Config.R_HIST_BINS,
                   r_max: float = Config.R_HIST_MAX) -> RDistribution:
    """
    Histogram of pooled r (not r_tilde) on [0, r_max].

    The density is normalized over [0, inf), so values beyond r_max still count
    in the total. Reference densities and chi^2/dof against both are attached.
    """
    pooled = np.concatenate([gap_ratios(s).r for s in ensemble])
    edges = np.linspace(0.0, r_max, bins + 1)
    counts, _ = np.histogram(pooled, bins=edges)
    widths = np.diff(edges)
    density = counts / (pooled.size * widths)

    centers = 0.5 * (edges[1:] + edges[:-1])
    poisson = poisson_r_density(centers)
    gue = gue_r_density(centers)

    # expected counts from the exact bin integrals of the references
    poisson_bins = pooled.size * (1.0 / (1.0 + edges[:-1]) - 1.0 / (1.0 + edges[1:]))
    gue_bins = pooled.size * gue * widths

    return RDistribution(
        edges=edges, density=density, counts=counts, n_total=int(pooled.size),
        poisson=poisson, gue=gue,
        chi2_poisson=_chi2_per_dof(counts, poisson_bins),
        chi2_gue=_chi2_per_dof(counts, gue_bins),
    )
