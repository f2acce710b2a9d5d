"""Fixed-point entanglement laws, special functions and fitters."""
from .special import digamma, jacobi_theta3, dedekind_eta
from .laws import (
    LAWS, page_law_density, fermi_liquid_density, lifshitz_J, lifshitz_density, area_law_density,
)
from .fitting import (
    ScalingLawFit, PrefactorResult, fit_scaling_law, fit_growth_law, prefactor_extraction, GROWTH_LAWS,
)

__all__ = [
    "digamma", "jacobi_theta3", "dedekind_eta", "LAWS", "page_law_density",
    "fermi_liquid_density", "lifshitz_J", "lifshitz_density", "area_law_density",
    "ScalingLawFit", "PrefactorResult", "fit_scaling_law", "fit_growth_law",
    "prefactor_extraction", "GROWTH_LAWS",
]
