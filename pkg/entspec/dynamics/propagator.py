"""
Single-particle propagator U = exp(-i h dt).
"""
from dataclasses import dataclass
import logging

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Propagator:
    """Precomputed unitary for one (lattice, dt) pair."""

    matrix: np.ndarray
    dt: float

    @classmethod
    def from_hopping(cls, hopping: np.ndarray, dt: float) -> "Propagator":
        if dt <= 0:
            raise ValueError(f"Time step must be positive, got {dt}")
        energies, modes = np.linalg.eigh(hopping)
        unitary = (modes * np.exp(-1j * energies * dt)) @ modes.conj().T
        logger.debug(f"Built propagator for V={hopping.shape[0]}, dt={dt}")
        return cls(matrix=unitary, dt=dt)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        return self.matrix @ psi

    def unitarity_error(self) -> float:
        identity = np.eye(self.matrix.shape[0])
        return float(np.max(np.abs(self.matrix.conj().T @ self.matrix - identity)))
