"""Run configuration, ensemble execution, analysis and figure recipes."""
from .run_config import RunConfig, load_run_config, parse_run_config, OBSERVABLES
from .simulate import EnsembleRunner, SimulationSummary, simulate
from .analyze import Analyzer, DIAGNOSTICS, analyze, verify_manifest
from .collapse import load_reports, load_samples, run_collapse
from .synthetic import SyntheticSummary, write_synthetic
from .figures import FIGURES, FigureRecipe, build_recipe, run_recipe

__all__ = [
    "RunConfig", "load_run_config", "parse_run_config", "OBSERVABLES",
    "EnsembleRunner", "SimulationSummary", "simulate",
    "Analyzer", "DIAGNOSTICS", "analyze", "verify_manifest",
    "load_reports", "load_samples", "run_collapse",
    "SyntheticSummary", "write_synthetic",
    "FIGURES", "FigureRecipe", "build_recipe", "run_recipe",
]
