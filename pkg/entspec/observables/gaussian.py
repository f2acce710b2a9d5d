"""
Correlation matrices and von Neumann entropies of Gaussian fermionic states.
"""
from dataclasses import dataclass, field
from typing import Optional, Union
import logging

import numpy as np
from scipy.special import xlogy

from ..config import Config
from ..exceptions import SpectrumError
from ..geometry.masks import SubsystemMask

logger = logging.getLogger(__name__)

Wavefunction = np.ndarray


def _psi(state) -> Wavefunction:
    return state.psi if hasattr(state, "psi") else np.asarray(state)


@dataclass
class CorrelationMatrix:
    """Subsystem correlation matrix G = (psi psi^dagger)|_A."""

    matrix: np.ndarray
    sites: np.ndarray
    clamp: float = Config.EIGENVALUE_CLAMP
    _eigenvalues: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues clamped to [0, 1], ascending."""
        if self._eigenvalues is None:
            self._eigenvalues = clamp_occupations(np.linalg.eigvalsh(self.matrix), self.clamp)
        return self._eigenvalues

    @property
    def particle_number(self) -> float:
        return float(np.real(np.trace(self.matrix)))


def clamp_occupations(eigenvalues: np.ndarray, clamp: float = Config.EIGENVALUE_CLAMP) -> np.ndarray:
    """Clamp correlation eigenvalues to [0, 1]; values beyond the tolerance signal a broken state."""
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    if eigenvalues.size and (eigenvalues.min() < -clamp or eigenvalues.max() > 1.0 + clamp):
        logger.error(f"Correlation eigenvalues outside [0, 1]: min={eigenvalues.min():.3e}, max={eigenvalues.max():.3e}")
        raise SpectrumError(
            f"Correlation eigenvalues outside [-{clamp}, 1+{clamp}]: "
            f"[{eigenvalues.min():.3e}, {eigenvalues.max():.3e}]"
        )
    return np.clip(eigenvalues, 0.0, 1.0)


def correlation_matrix(state, mask: Union[SubsystemMask, np.ndarray]) -> CorrelationMatrix:
    """
    Restrict the correlation matrix of a Gaussian state to a mask.

    Args:
        state: TrajectoryState or V x N wavefunction matrix
        mask: SubsystemMask or array of site indices

    Returns:
        CorrelationMatrix with Hermiticity enforced by symmetrization
    """
    sites = mask.sites if isinstance(mask, SubsystemMask) else np.asarray(mask, dtype=np.int64)
    if sites.size == 0:
        raise ValueError("Cannot build a correlation matrix on an empty mask")
    rows = _psi(state)[sites]
    g = rows @ rows.conj().T
    g = 0.5 * (g + g.conj().T)
    return CorrelationMatrix(matrix=g, sites=sites)


def entropy_from_eigenvalues(eigenvalues: np.ndarray) -> float:
    """S = -sum[l ln l + (1 - l) ln(1 - l)] with 0 ln 0 = 0."""
    lam = np.asarray(eigenvalues, dtype=float)
    return float(-np.sum(xlogy(lam, lam) + xlogy(1.0 - lam, 1.0 - lam)))


def von_neumann_entropy(g: Union[CorrelationMatrix, np.ndarray]) -> float:
    """
    Von Neumann entropy of a Gaussian state from its correlation matrix.

    Accepts a CorrelationMatrix, a Hermitian matrix or a 1D array of eigenvalues.
    """
    if isinstance(g, CorrelationMatrix):
        lam = g.eigenvalues
    else:
        g = np.asarray(g)
        lam = clamp_occupations(np.linalg.eigvalsh(g) if g.ndim == 2 else g)
    return max(entropy_from_eigenvalues(lam), 0.0)


def entanglement_entropy(state, mask: Union[SubsystemMask, np.ndarray]) -> float:
    """Shorthand for von_neumann_entropy(correlation_matrix(state, mask))."""
    return von_neumann_entropy(correlation_matrix(state, mask))


def mutual_information(state, mask_a: SubsystemMask, mask_b: SubsystemMask) -> float:
    """
    Mutual information I(A, B) = S_A + S_B - S_AB of two disjoint subsystems.
    """
    sites_a = mask_a.sites if isinstance(mask_a, SubsystemMask) else np.asarray(mask_a)
    sites_b = mask_b.sites if isinstance(mask_b, SubsystemMask) else np.asarray(mask_b)
    if np.intersect1d(sites_a, sites_b).size:
        raise ValueError("Mutual information requires disjoint masks")

    union = np.union1d(sites_a, sites_b)
    info = (
        entanglement_entropy(state, sites_a)
        + entanglement_entropy(state, sites_b)
        - entanglement_entropy(state, union)
    )
    if info < -1e-9:
        logger.warning(f"Negative mutual information {info:.3e} beyond tolerance")
    return max(info, 0.0)
