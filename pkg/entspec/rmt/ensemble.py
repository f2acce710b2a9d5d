"""
Homogeneous collections of entanglement spectra.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Iterator, List
import logging

import numpy as np

from ..spectrum.hamiltonian import EntanglementSpectrum

logger = logging.getLogger(__name__)

HOMOGENEOUS_KEYS = ("d", "L", "gamma", "geometry")


@dataclass
class SpectralEnsemble:
    """Spectra at fixed (d, L, gamma, geometry), sorted by (trajectory id, time)."""

    spectra: List[EntanglementSpectrum]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.spectra = sorted(
            self.spectra,
            key=lambda s: (s.metadata.get("trajectory_id", 0), s.metadata.get("time", 0.0)),
        )
        for key in HOMOGENEOUS_KEYS:
            values = {s.metadata.get(key) for s in self.spectra}
            if len(values) > 1:
                raise ValueError(f"Ensemble is not homogeneous in '{key}': {sorted(map(str, values))}")
            if values and key not in self.metadata:
                self.metadata[key] = values.pop()

    @classmethod
    def from_iterable(cls, spectra: Iterable[EntanglementSpectrum], **metadata) -> "SpectralEnsemble":
        return cls(list(spectra), dict(metadata))

    def __len__(self) -> int:
        return len(self.spectra)

    def __iter__(self) -> Iterator[EntanglementSpectrum]:
        return iter(self.spectra)

    def __getitem__(self, index: int) -> EntanglementSpectrum:
        return self.spectra[index]

    @property
    def linear_size(self) -> int:
        size = self.metadata.get("L")
        if size is None:
            raise ValueError("Ensemble metadata carries no linear size L")
        return int(size)

    @property
    def has_eigenvectors(self) -> bool:
        return bool(self.spectra) and all(s.has_eigenvectors for s in self.spectra)

    def pooled_energies(self) -> np.ndarray:
        """Sorted unsaturated energies of all members."""
        if not self.spectra:
            return np.array([])
        return np.sort(np.concatenate([s.unsaturated_energies for s in self.spectra]))
