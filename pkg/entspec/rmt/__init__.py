"""Random-matrix diagnostics of entanglement spectra."""
from .ensemble import SpectralEnsemble
from .ratios import (
    GapRatios, RDistribution, gap_ratios, mean_gap_ratio, r_distribution,
    poisson_r_density, gue_r_density, POISSON_MEAN_R_TILDE, GUE_MEAN_R_TILDE,
)
from .divergence import kl1, mean_kl1, kl2, kl2_values, KL_MATCHINGS
from .unfolding import UnfoldedEnsemble, unfold, unfold_levels
from .form_factor import (
    SFFCurve, ThoulessTime, spectral_form_factor, thouless_time, thouless_time_blocks, gue_form_factor,
)
from .synthetic import synthetic_ensemble, gue_spectra, poisson_spectra, SYNTHETIC_KINDS

__all__ = [
    "SpectralEnsemble", "GapRatios", "RDistribution", "gap_ratios", "mean_gap_ratio",
    "r_distribution", "poisson_r_density", "gue_r_density", "POISSON_MEAN_R_TILDE",
    "GUE_MEAN_R_TILDE", "kl1", "mean_kl1", "kl2", "kl2_values", "KL_MATCHINGS",
    "UnfoldedEnsemble", "unfold", "unfold_levels", "SFFCurve", "ThoulessTime",
    "spectral_form_factor", "thouless_time", "thouless_time_blocks", "gue_form_factor", "synthetic_ensemble",
    "gue_spectra", "poisson_spectra", "SYNTHETIC_KINDS",
]
