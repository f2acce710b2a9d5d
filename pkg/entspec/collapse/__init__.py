"""Finite-size scaling collapse and crossing analysis."""
from .fss import (
    CollapseInput, CollapseCost, CollapseResult, CombinedEstimate, CollapseMinimizer, ANSATZE,
    rescale, collapse_cost, total_cost, minimize_collapse, bootstrap_collapse, weighted_average_estimates,
)
from .crossings import Crossing, find_crossings, crossings_frame, is_monotone_drift

__all__ = [
    "CollapseInput", "CollapseCost", "CollapseResult", "CombinedEstimate", "CollapseMinimizer",
    "ANSATZE", "rescale", "collapse_cost", "total_cost", "minimize_collapse", "bootstrap_collapse",
    "weighted_average_estimates", "Crossing", "find_crossings", "crossings_frame", "is_monotone_drift",
]
