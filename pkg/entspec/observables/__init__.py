"""Correlation matrices, entropies and observable series of Gaussian states."""
from .gaussian import (
    CorrelationMatrix, correlation_matrix, von_neumann_entropy, entropy_from_eigenvalues,
    entanglement_entropy, mutual_information, clamp_occupations,
)
from .series import (
    ObservableSeries, entanglement_density_curve, density_curve_from_entropies,
    time_series, check_stationarity, standard_error,
)
from .fock import fock_entropy

__all__ = [
    "CorrelationMatrix", "correlation_matrix", "von_neumann_entropy", "entropy_from_eigenvalues",
    "entanglement_entropy", "mutual_information", "clamp_occupations",
    "ObservableSeries", "entanglement_density_curve", "density_curve_from_entropies",
    "time_series", "check_stationarity", "standard_error", "fock_entropy",
]
