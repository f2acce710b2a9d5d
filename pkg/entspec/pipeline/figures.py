"""
Canned recipes producing the plot data of each figure at configurable scale.

A recipe is a list of run configurations, the diagnostics to compute over the
resulting ensembles, and optional collapse and crossing steps on the reports.
"""
from dataclasses import dataclass, field
import os
from typing import Dict, List, Optional, Sequence
import logging

import numpy as np

from .. import provenance
from ..collapse import crossings_frame, find_crossings
from ..config import resolve_output_dir
from ..exceptions import ConfigError
from .analyze import analyze
from .collapse import load_reports, run_collapse
from .run_config import RunConfig, parse_run_config
from .simulate import simulate

logger = logging.getLogger(__name__)

FIGURES = tuple(range(1, 9))
FIXED_POINT_GAMMAS = (0.05, 2.15, 5.1, 10.0)
LIMIT_GAMMAS = (0.1, 10.0)
SWEEP_2D = tuple(np.round(np.linspace(4.4, 6.0, 9), 3))
SWEEP_3D = tuple(np.round(np.linspace(10.0, 13.0, 7), 3))
SWEEP_1D = tuple(np.round(np.linspace(0.5, 4.0, 8), 3))
PREFACTOR_GAMMAS = (1.0, 1.5, 2.15, 3.0, 4.0)


@dataclass
class CollapseStep:
    report: str
    ansatz: str = "linear"
    dimension: Optional[int] = None
    geometry: Optional[str] = "checkerboard"


@dataclass
class CrossingStep:
    report: str
    value: str = "mean"
    dimension: Optional[int] = None
    geometry: Optional[str] = None


@dataclass
class FigureRecipe:
    """Runs, diagnostics and post-processing of one figure."""

    number: int
    title: str
    directory: str
    runs: List[RunConfig] = field(default_factory=list)
    diagnostics: List[str] = field(default_factory=list)
    collapses: List[CollapseStep] = field(default_factory=list)
    crossings: List[CrossingStep] = field(default_factory=list)

    @property
    def reports_dir(self) -> str:
        return os.path.join(self.directory, "reports")


def _run(directory: str, d: int, size: int, gammas: Sequence[float], trajectories: int,
         observables: Sequence[str], geometries: Sequence[str] = ("checkerboard",),
         keep_eigenvectors: bool = False, seed: int = 0, workers: int = 1, **evolution) -> RunConfig:
    label = evolution.pop("label", "")
    data = {
        "lattice": {"dimension": d, "size": size},
        "evolution": dict({"gammas": list(gammas), "sample_interval": 1.0, "samples": 5}, **evolution),
        "ensemble": {"trajectories": trajectories, "seed": seed, "workers": workers},
        "observables": {"geometries": list(geometries), "observables": list(observables),
                        "keep_eigenvectors": keep_eigenvectors},
        "output": {"directory": os.path.join(directory, f"d{d}_L{size}{label}")},
    }
    return parse_run_config(data)


def build_recipe(number: int, output_dir: str, sizes: Optional[Sequence[int]] = None,
                 trajectories: int = 20, gammas: Optional[Sequence[float]] = None,
                 seed: int = 0, workers: int = 1) -> FigureRecipe:
    """
    Assemble the recipe of one figure.

    Args:
        number: Figure number 1-8
        output_dir: Root directory; the recipe writes into figure<n>/
        sizes: Linear sizes (defaults depend on the figure)
        trajectories: Trajectories per (L, gamma)
        gammas: Monitoring rates (defaults depend on the figure)
    """
    if number not in FIGURES:
        raise ConfigError(f"Unknown figure {number}. Valid: {', '.join(map(str, FIGURES))}")
    directory = os.path.join(os.path.abspath(resolve_output_dir(output_dir)), f"figure{number}")
    common = {"trajectories": trajectories, "seed": seed, "workers": workers}

    def pick(default_sizes, default_gammas):
        return list(sizes or default_sizes), list(gammas or default_gammas)

    if number == 1:
        ls, gs = pick((16,), FIXED_POINT_GAMMAS)
        runs = []
        for size in ls:
            runs.append(_run(directory, 2, size, gs, observables=["entropy_curve"], geometries=["half_cut"],
                             **common))
            runs.append(_run(directory, 2, size, gs, observables=["half_cut_entropy"], initial_state="neel",
                             burn_in=0.0, sample_interval=0.5, samples=4 * size, label="_neel",
                             geometries=["half_cut"], **common))
        return FigureRecipe(1, "Fixed points: entanglement curves and Neel-start dynamics", directory, runs,
                            ["entropy_curve", "entropy_dynamics"])

    if number == 2:
        ls, gs = pick((16,), (0.1, 2.15, 5.1, 10.0))
        runs = [_run(directory, 2, size, gs, observables=["spectrum"],
                     geometries=["half_cut", "checkerboard"], **common) for size in ls]
        return FigureRecipe(2, "Entanglement-Hamiltonian DoS and gap-ratio distribution", directory, runs,
                            ["dos", "r_distribution", "gap_ratio"])

    if number == 3:
        ls, gs = pick((8, 12, 16), LIMIT_GAMMAS)
        runs = [_run(directory, 2, size, gs, observables=["spectrum"], keep_eigenvectors=True, **common)
                for size in ls]
        return FigureRecipe(3, "Short-range statistics in the weak and strong monitoring limits", directory,
                            runs, ["gap_ratio", "kl1"])

    if number == 4:
        ls, gs = pick((16,), LIMIT_GAMMAS)
        runs = [_run(directory, 2, size, gs, observables=["spectrum"], keep_eigenvectors=True, **common)
                for size in ls]
        return FigureRecipe(4, "Long-range statistics in the weak and strong monitoring limits", directory,
                            runs, ["sff", "thouless", "kl2"])

    if number == 5:
        ls, gs = pick((8, 12, 16), SWEEP_2D)
        runs = [_run(directory, 2, size, gs, observables=["spectrum"], keep_eigenvectors=True, **common)
                for size in ls]
        return FigureRecipe(5, "Gap ratio and KL1 across the transition with scaling collapse", directory, runs,
                            ["gap_ratio", "kl1"], [CollapseStep("gap_ratio"), CollapseStep("kl1")],
                            [CrossingStep("gap_ratio", geometry="checkerboard"),
                             CrossingStep("kl1", geometry="checkerboard")])

    if number == 6:
        ls, gs = pick((8, 12, 16), SWEEP_2D)
        runs = [_run(directory, 2, size, gs, observables=["spectrum"], keep_eigenvectors=True, **common)
                for size in ls]
        return FigureRecipe(6, "Thouless-time collapse and KL2 crossings", directory, runs,
                            ["sff", "thouless", "kl2"], [CollapseStep("thouless")],
                            [CrossingStep("kl2", geometry="checkerboard")])

    if number == 7:
        if sizes:
            ls3, ls1 = list(sizes), list(sizes)
        else:
            ls3, ls1 = [4, 6, 8], [32, 64, 128]
        g3 = list(gammas or SWEEP_3D)
        g1 = list(gammas or SWEEP_1D)
        runs = [_run(directory, 3, size, g3, observables=["spectrum"], keep_eigenvectors=True, **common)
                for size in ls3]
        runs += [_run(directory, 1, size, g1, observables=["spectrum"], keep_eigenvectors=True, **common)
                 for size in ls1]
        return FigureRecipe(7, "Three-dimensional nonlinear collapse and one-dimensional crossing drift",
                            directory, runs, ["gap_ratio", "kl1", "kl2"],
                            [CollapseStep("gap_ratio", "nonlinear", dimension=3),
                             CollapseStep("kl1", "nonlinear", dimension=3)],
                            [CrossingStep("gap_ratio", dimension=1, geometry="checkerboard"),
                             CrossingStep("kl1", dimension=1, geometry="checkerboard"),
                             CrossingStep("kl2", dimension=1, geometry="checkerboard")])

    ls, gs = pick((8, 10, 12, 14, 16), PREFACTOR_GAMMAS)
    runs = [_run(directory, 2, size, gs, observables=["half_cut_entropy", "mutual_information"],
                 geometries=["half_cut"], **common)
            for size in ls]
    return FigureRecipe(8, "Half-cut prefactor and mutual-information crossing", directory, runs,
                        ["prefactor", "mutual_information"], [],
                        [CrossingStep("prefactor", value="c"), CrossingStep("mutual_information")])


def run_recipe(recipe: FigureRecipe, show_progress: bool = True) -> Dict[str, List[str]]:
    """Simulate, analyze and post-process one recipe; returns written paths by stage."""
    logger.info(f"Figure {recipe.number}: {recipe.title} ({len(recipe.runs)} runs)")
    written: Dict[str, List[str]] = {"simulate": [], "analyze": [], "collapse": [], "crossings": []}
    try:
        directories = []
        for config in recipe.runs:
            summary = simulate(config, show_progress=show_progress)
            directories.append(summary.directory)
            written["simulate"].extend(os.path.join(summary.directory, p) for p in summary.outputs)

        written["analyze"] = analyze(directories, recipe.diagnostics, recipe.reports_dir)

        for step in recipe.collapses:
            report = os.path.join(recipe.reports_dir, f"{step.report}.csv")
            run_collapse([report], step.report, step.ansatz, recipe.reports_dir,
                         geometry=step.geometry, dimension=step.dimension)
            written["collapse"].append(os.path.join(recipe.reports_dir, f"collapse_{step.report}_{step.ansatz}.csv"))

        for step in recipe.crossings:
            written["crossings"].append(_write_crossings(recipe, step))
    except Exception as e:
        logger.error(f"Figure {recipe.number} failed: {str(e)}")
        raise
    return written


def _write_crossings(recipe: FigureRecipe, step: CrossingStep) -> str:
    report = os.path.join(recipe.reports_dir, f"{step.report}.csv")
    reports = load_reports([report], step.geometry, step.dimension)
    value = step.value
    crossings = find_crossings(reports, value=value)
    suffix = f"_d{step.dimension}" if step.dimension is not None else ""
    path = os.path.join(recipe.reports_dir, f"crossings_{step.report}{suffix}.csv")
    provenance.write_csv(crossings_frame(crossings), path,
                         {"report": step.report, "value": value, "dimension": step.dimension or "any"})
    return path
