"""
Synthetic GUE and Poisson ensembles for calibrating the spectral statistics.
"""
from typing import Optional
import logging

import numpy as np

from ..spectrum.hamiltonian import EntanglementSpectrum, occupations_from_energies
from .ensemble import SpectralEnsemble

logger = logging.getLogger(__name__)

SYNTHETIC_KINDS = ("gue", "poisson")


def gue_matrix(n: int, rng: np.random.Generator) -> np.ndarray:
    """Hermitian matrix with complex Gaussian entries, (A + A^dagger)/2."""
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (a + a.conj().T)


def gue_spectra(n_levels: int, n_samples: int, rng: np.random.Generator,
                keep_eigenvectors: bool = True):
    """Eigenvalues (and eigenvectors) of independent GUE matrices."""
    for _ in range(n_samples):
        matrix = gue_matrix(n_levels, rng)
        if keep_eigenvectors:
            yield np.linalg.eigh(matrix)
        else:
            yield np.linalg.eigvalsh(matrix), None


def poisson_spectra(n_levels: int, n_samples: int, rng: np.random.Generator,
                    keep_eigenvectors: bool = True):
    """Sorted i.i.d. uniform levels with site-localized eigenvectors."""
    for _ in range(n_samples):
        levels = np.sort(rng.uniform(-1.0, 1.0, n_levels))
        vectors = np.eye(n_levels)[:, rng.permutation(n_levels)] if keep_eigenvectors else None
        yield levels, vectors


def synthetic_ensemble(kind: str, n_levels: int, n_samples: int, seed: Optional[int] = 0,
                       keep_eigenvectors: bool = True, linear_size: Optional[int] = None) -> SpectralEnsemble:
    """
    SpectralEnsemble drawn from a reference random-matrix class.

    Args:
        kind: 'gue' or 'poisson'
        n_levels: Levels per spectrum
        n_samples: Number of spectra
        seed: Master seed
        keep_eigenvectors: Attach eigenvectors for KL statistics
        linear_size: L used in KL normalization (default n_levels)
    """
    if kind not in SYNTHETIC_KINDS:
        raise ValueError(f"Unknown synthetic ensemble '{kind}'. Valid: {', '.join(SYNTHETIC_KINDS)}")
    rng = np.random.default_rng(seed)
    generator = gue_spectra if kind == "gue" else poisson_spectra
    size = linear_size or n_levels

    spectra = []
    for i, (levels, vectors) in enumerate(generator(n_levels, n_samples, rng, keep_eigenvectors)):
        spectra.append(EntanglementSpectrum(
            energies=np.asarray(levels, dtype=float),
            occupations=occupations_from_energies(levels),
            saturated=np.zeros(n_levels, dtype=bool),
            sites=np.arange(n_levels),
            eigenvectors=vectors,
            metadata={"d": 0, "L": size, "gamma": 0.0, "geometry": f"synthetic_{kind}",
                      "trajectory_id": i, "time": 0.0},
        ))
    logger.info(f"Generated {n_samples} synthetic {kind} spectra with {n_levels} levels")
    return SpectralEnsemble(spectra)
