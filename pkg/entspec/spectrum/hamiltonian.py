"""
Entanglement Hamiltonian of a Gaussian subsystem.

Energies e = ln[(1 - l)/l] of the correlation eigenvalues l; levels with l
within the saturation clamp of 0 or 1 are pinned to +/- e_max and flagged.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Union
import logging

import numpy as np

from ..config import Config
from ..observables.gaussian import CorrelationMatrix, clamp_occupations, entropy_from_eigenvalues

logger = logging.getLogger(__name__)

SATURATION_CLAMP = Config.SATURATION_CLAMP
MAX_ENERGY = float(np.log((1.0 - SATURATION_CLAMP) / SATURATION_CLAMP))


@dataclass
class EntanglementSpectrum:
    """Sorted entanglement energies of one trajectory snapshot."""

    energies: np.ndarray
    occupations: np.ndarray
    saturated: np.ndarray
    sites: Optional[np.ndarray] = None
    eigenvectors: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_levels(self) -> int:
        return int(self.energies.size)

    @property
    def unsaturated_energies(self) -> np.ndarray:
        return self.energies[~self.saturated]

    @property
    def n_saturated(self) -> int:
        return int(np.count_nonzero(self.saturated))

    @property
    def has_eigenvectors(self) -> bool:
        return self.eigenvectors is not None or self.weights is not None

    @property
    def probability_densities(self) -> np.ndarray:
        """|psi_alpha(i)|^2 as a (|A|, M) array, columns ordered like energies."""
        if self.weights is not None:
            return self.weights
        if self.eigenvectors is None:
            raise ValueError("Spectrum carries no eigenvectors")
        return np.abs(self.eigenvectors) ** 2

    def entropy(self) -> float:
        return max(entropy_from_eigenvalues(self.occupations), 0.0)

    def shifted(self, shift: float) -> "EntanglementSpectrum":
        """Copy with every unsaturated energy shifted by a constant."""
        energies = np.where(self.saturated, self.energies, self.energies + shift)
        return EntanglementSpectrum(energies, self.occupations, self.saturated, self.sites,
                                    self.eigenvectors, self.weights, dict(self.metadata))


def occupations_from_energies(energies: np.ndarray) -> np.ndarray:
    """l = 1/(e^eps + 1), evaluated as (1 - tanh(eps/2))/2 for stability."""
    return 0.5 * (1.0 - np.tanh(0.5 * np.asarray(energies, dtype=float)))


def entanglement_hamiltonian(g: Union[CorrelationMatrix, np.ndarray], keep_eigenvectors: bool = True,
                             metadata: Optional[Dict[str, Any]] = None,
                             clamp: float = SATURATION_CLAMP) -> EntanglementSpectrum:
    """
    Diagonalize a subsystem correlation matrix into an entanglement spectrum.

    Args:
        g: CorrelationMatrix or Hermitian matrix with spectrum in [0, 1]
        keep_eigenvectors: Retain the eigenvector matrix (needed for KL statistics)
        metadata: gamma, L, d, geometry, trajectory_id, time
        clamp: Saturation tolerance

    Returns:
        EntanglementSpectrum with energies ascending
    """
    matrix = g.matrix if isinstance(g, CorrelationMatrix) else np.asarray(g)
    sites = g.sites if isinstance(g, CorrelationMatrix) else None

    if keep_eigenvectors:
        lam, vecs = np.linalg.eigh(matrix)
    else:
        lam, vecs = np.linalg.eigvalsh(matrix), None
    lam = clamp_occupations(lam)

    # eigh is ascending in l, so descending l gives ascending energy
    lam = lam[::-1]
    if vecs is not None:
        vecs = vecs[:, ::-1]

    low = lam <= clamp
    high = lam >= 1.0 - clamp
    saturated = low | high
    with np.errstate(divide="ignore", invalid="ignore"):
        energies = np.log((1.0 - lam) / lam)
    energies = np.where(low, MAX_ENERGY, np.where(high, -MAX_ENERGY, energies))

    if saturated.any():
        logger.debug(f"{int(saturated.sum())} of {lam.size} entanglement levels saturated")

    return EntanglementSpectrum(
        energies=energies,
        occupations=lam,
        saturated=saturated,
        sites=sites,
        eigenvectors=vecs,
        metadata=dict(metadata or {}),
    )
