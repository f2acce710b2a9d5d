"""
Exact Fock-space entanglement entropy of a Slater determinant.

Builds the C(V, N) many-body amplitudes from the single-particle matrix psi and
traces out the complement of a mask. Used to verify the correlation-matrix
route on small lattices.
"""
from itertools import combinations
from typing import Tuple, Union

import numpy as np

from ..geometry.masks import SubsystemMask

MAX_FOCK_SITES = 16


def slater_amplitudes(psi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Amplitudes <n|Psi> for every occupation pattern.

    Returns:
        (occupied sites per pattern as a (C, N) array, determinants of shape (C,))
    """
    n_sites, n_particles = psi.shape
    patterns = np.array(list(combinations(range(n_sites), n_particles)), dtype=np.intp)
    patterns = patterns.reshape(-1, n_particles)
    return patterns, np.linalg.det(psi[patterns])


def _bit_index(sites: np.ndarray, selected: np.ndarray, offset: int) -> np.ndarray:
    bits = np.left_shift(np.int64(1), np.where(selected, sites - offset, 0))
    return np.sum(np.where(selected, bits, 0), axis=1)


def fock_entropy(psi: np.ndarray, mask: Union[SubsystemMask, np.ndarray]) -> float:
    """
    Entropy -tr(rho_A ln rho_A) from the exact many-body state.

    Modes are reordered with the mask sites first, so the Fock space factorizes
    as H_A (x) H_B without Jordan-Wigner strings between the factors.
    """
    psi = psi.psi if hasattr(psi, "psi") else np.asarray(psi)
    n_sites = psi.shape[0]
    if n_sites > MAX_FOCK_SITES:
        raise ValueError(f"Fock-space oracle limited to {MAX_FOCK_SITES} sites, got {n_sites}")

    sites_a = np.asarray(mask.sites if isinstance(mask, SubsystemMask) else mask, dtype=int)
    sites_b = np.setdiff1d(np.arange(n_sites), sites_a)
    order = np.concatenate([sites_a, sites_b])
    n_a, n_b = sites_a.size, sites_b.size

    patterns, dets = slater_amplitudes(psi[order])
    in_a = patterns < n_a
    rows = _bit_index(patterns, in_a, 0)
    cols = _bit_index(patterns, ~in_a, n_a)

    amplitudes = np.zeros((2 ** n_a, 2 ** n_b), dtype=complex)
    amplitudes[rows, cols] = dets

    rho = amplitudes @ amplitudes.conj().T
    weights = np.linalg.eigvalsh(rho)
    weights = weights[weights > 1e-15]
    return float(-np.sum(weights * np.log(weights)))
