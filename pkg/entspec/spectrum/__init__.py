"""Entanglement Hamiltonian spectra and their density of states."""
from .hamiltonian import (
    EntanglementSpectrum, entanglement_hamiltonian, occupations_from_energies,
    MAX_ENERGY, SATURATION_CLAMP,
)
from .dos import DensityOfStates, density_of_states

__all__ = [
    "EntanglementSpectrum", "entanglement_hamiltonian", "occupations_from_energies",
    "MAX_ENERGY", "SATURATION_CLAMP", "DensityOfStates", "density_of_states",
]
