"""
Kullback-Leibler divergences between entanglement eigenfunctions.

kl1 compares consecutive eigenfunctions of one realization, kl2 compares
eigenfunctions of two realizations that are neighbours in energy. Both are
normalized by 2/L with L the linear system size.
"""
from typing import Optional
import logging

import numpy as np

from ..config import Config
from ..spectrum.hamiltonian import EntanglementSpectrum
from .ensemble import SpectralEnsemble
from .unfolding import unfold

logger = logging.getLogger(__name__)

KL_MATCHINGS = ("rank", "energy")


def _pair_divergences(p: np.ndarray, q: np.ndarray, floor: float = Config.KL_FLOOR) -> np.ndarray:
    """sum_i p_i ln(p_i / q_i) for every column pair of two (|A|, K) arrays."""
    p = np.maximum(p, floor)
    q = np.maximum(q, floor)
    return np.sum(p * (np.log(p) - np.log(q)), axis=0)


def _check_pairs(pairs: np.ndarray) -> None:
    if pairs.size and pairs.min() < -1e-9:
        logger.warning(f"Negative eigenfunction divergence {pairs.min():.3e}; eigenvectors may not be normalized")


def _linear_size(spectrum: EntanglementSpectrum, linear_size: Optional[int]) -> int:
    size = linear_size if linear_size is not None else spectrum.metadata.get("L")
    if size is None:
        raise ValueError("KL normalization needs the linear system size L")
    return int(size)


def kl1(spectrum: EntanglementSpectrum, linear_size: Optional[int] = None) -> float:
    """
    KL1 = (2/L) sum_a sum_i |psi_a(i)|^2 ln(|psi_a(i)|^2 / |psi_{a+1}(i)|^2).
    """
    if not spectrum.has_eigenvectors:
        raise ValueError("KL1 needs eigenvectors")
    size = _linear_size(spectrum, linear_size)
    dens = spectrum.probability_densities
    pairs = _pair_divergences(dens[:, :-1], dens[:, 1:])
    _check_pairs(pairs)
    return float(2.0 / size * pairs.sum())


def mean_kl1(ensemble: SpectralEnsemble):
    """(mean, stderr) of KL1 over the ensemble."""
    values = np.array([kl1(s, ensemble.metadata.get("L")) for s in ensemble])
    stderr = values.std(ddof=1) / np.sqrt(values.size) if values.size > 1 else np.nan
    return float(values.mean()), float(stderr)


def _energy_partners(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Index in `second` of the level closest to level a+1 of `first` (both sorted)."""
    target = first[1:]
    candidates = second
    idx = np.clip(np.searchsorted(candidates, target), 1, candidates.size - 1)
    left_closer = np.abs(target - candidates[idx - 1]) <= np.abs(candidates[idx] - target)
    return np.where(left_closer, idx - 1, idx)


def kl2_values(ensemble: SpectralEnsemble, matching: str = "rank") -> np.ndarray:
    """
    KL2 of every (2k, 2k+1) pair of realizations.

    `rank` pairs level a of the first realization with level a+1 of the second.
    `energy` pairs it with the level of the second realization closest to its own
    level a+1 after both are mapped through the ensemble unfolding staircase, so the
    match does not depend on the local density of levels.
    """
    if matching not in KL_MATCHINGS:
        raise ValueError(f"Unknown KL2 matching '{matching}'. Valid: {', '.join(KL_MATCHINGS)}")
    if len(ensemble) < 2:
        raise ValueError("KL2 needs at least two spectra")
    if not ensemble.has_eigenvectors:
        raise ValueError("KL2 needs eigenvectors")

    members = ensemble.spectra
    if len(members) % 2:
        logger.warning(f"Dropping unpaired spectrum (trajectory {members[-1].metadata.get('trajectory_id')}) from KL2")
        members = members[:-1]

    staircase = unfold(ensemble).staircase if matching == "energy" else None
    size = ensemble.linear_size
    values = []
    for first, second in zip(members[0::2], members[1::2]):
        if first.sites is not None and second.sites is not None and not np.array_equal(first.sites, second.sites):
            raise ValueError("KL2 pairs must share an identical mask")
        p = first.probability_densities
        q = second.probability_densities
        if matching == "rank":
            pairs = _pair_divergences(p[:, :-1], q[:, 1:])
        else:
            partners = _energy_partners(staircase(first.energies), staircase(second.energies))
            pairs = _pair_divergences(p[:, :-1], q[:, partners])
        _check_pairs(pairs)
        values.append(2.0 / size * pairs.sum())
    return np.asarray(values)


def kl2(ensemble: SpectralEnsemble, matching: str = "rank") -> float:
    """
    KL2 averaged over pairs of realizations (2k, 2k+1) in trajectory order.
    """
    return float(kl2_values(ensemble, matching).mean())
