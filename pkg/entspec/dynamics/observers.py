"""
Observers sampled along a trajectory.
"""
from abc import ABC, abstractmethod
from typing import Any, Dict, Optional, Sequence
import logging

import numpy as np

from ..geometry.masks import SubsystemMask
from ..observables.gaussian import correlation_matrix, entanglement_entropy, mutual_information
from ..spectrum.hamiltonian import EntanglementSpectrum, entanglement_hamiltonian


class Observer(ABC):
    """Abstract base class for trajectory observers."""

    def __init__(self, name: str, config: Optional[Dict[str, Any]] = None):
        """
        Initialize with configuration.

        Args:
            name: Key under which snapshots store the observation
            config: Observer-specific parameters
        """
        self.name = name
        self.config = config or {}
        self.logger = logging.getLogger(f"Observer.{self.__class__.__name__}")

    @abstractmethod
    def observe(self, state) -> Any:
        """
        Measure the current state.

        Returns:
            Observation stored in the snapshot
        """
        pass


class EntropyObserver(Observer):
    """Von Neumann entropies of one or more masks."""

    def __init__(self, name: str, masks: Sequence[SubsystemMask]):
        super().__init__(name, {"masks": [m.descriptor() for m in masks]})
        self.masks = list(masks)

    def observe(self, state) -> np.ndarray:
        return np.array([entanglement_entropy(state, m) for m in self.masks])


class SpectrumObserver(Observer):
    """Entanglement spectrum of a mask."""

    def __init__(self, name: str, mask: SubsystemMask, keep_eigenvectors: bool = False,
                 metadata: Optional[Dict[str, Any]] = None):
        super().__init__(name, {"mask": mask.descriptor(), "keep_eigenvectors": keep_eigenvectors})
        self.mask = mask
        self.keep_eigenvectors = keep_eigenvectors
        self.metadata = dict(metadata or {})

    def observe(self, state) -> EntanglementSpectrum:
        meta = dict(self.metadata, geometry=self.mask.geometry,
                    trajectory_id=state.trajectory_id, time=state.time)
        spectrum = entanglement_hamiltonian(correlation_matrix(state, self.mask),
                                            keep_eigenvectors=self.keep_eigenvectors, metadata=meta)
        if spectrum.eigenvectors is not None:
            # only |psi|^2 enters the divergences
            spectrum.weights = np.abs(spectrum.eigenvectors) ** 2
            spectrum.eigenvectors = None
        return spectrum


class MutualInformationObserver(Observer):
    """Mutual information between two disjoint masks."""

    def __init__(self, name: str, mask_a: SubsystemMask, mask_b: SubsystemMask):
        super().__init__(name, {"mask_a": mask_a.descriptor(), "mask_b": mask_b.descriptor()})
        self.mask_a = mask_a
        self.mask_b = mask_b

    def observe(self, state) -> float:
        return mutual_information(state, self.mask_a, self.mask_b)


class OccupationObserver(Observer):
    """Site occupations <n_l>."""

    def observe(self, state) -> np.ndarray:
        return state.occupations()
