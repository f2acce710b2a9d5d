"""
Collapse stage: pools analysis reports across sizes and runs the FSS minimizer.
"""
import os
from typing import Dict, Optional, Sequence
import logging

import pandas as pd

from .. import provenance
from ..collapse import (
    CollapseInput, CollapseResult, bootstrap_collapse, crossings_frame, find_crossings, minimize_collapse,
)
from ..exceptions import CollapseError

logger = logging.getLogger(__name__)


def load_reports(report_files: Sequence[str], geometry: Optional[str] = None,
                 dimension: Optional[int] = None) -> pd.DataFrame:
    """Concatenate report tables, optionally restricted to one geometry and dimension."""
    frames = []
    for path in report_files:
        frame, _ = provenance.read_csv(path)
        frames.append(frame)
    if not frames:
        raise CollapseError("No report files given")
    reports = pd.concat(frames, ignore_index=True)
    if geometry is not None and "geometry" in reports.columns:
        reports = reports[reports["geometry"] == geometry]
    if dimension is not None and "d" in reports.columns:
        reports = reports[reports["d"] == dimension]
    missing = {"gamma", "L"} - set(reports.columns)
    if missing:
        raise CollapseError(f"Reports lack columns {sorted(missing)}")
    dims = reports["d"].unique() if "d" in reports.columns else []
    if len(dims) > 1:
        raise CollapseError(f"Reports mix dimensions {sorted(dims)}; select one with --dimension")
    return reports.sort_values(["L", "gamma"]).reset_index(drop=True)


def samples_path(report_file: str) -> str:
    """<stem>_samples<ext> next to a report file."""
    root, ext = os.path.splitext(report_file)
    return f"{root}_samples{ext}"


def load_samples(report_files: Sequence[str], geometry: Optional[str] = None,
                 dimension: Optional[int] = None) -> Optional[pd.DataFrame]:
    """Per-trajectory tables written next to the reports; None when there are none."""
    frames = []
    for path in report_files:
        sibling = samples_path(path)
        if os.path.exists(sibling):
            frame, _ = provenance.read_csv(sibling)
            frames.append(frame)
    if not frames:
        return None
    samples = pd.concat(frames, ignore_index=True)
    if geometry is not None and "geometry" in samples.columns:
        samples = samples[samples["geometry"] == geometry]
    if dimension is not None and "d" in samples.columns:
        samples = samples[samples["d"] == dimension]
    logger.info(f"Loaded {len(samples)} per-trajectory samples from {len(frames)} files")
    return samples


def run_collapse(report_files: Sequence[str], observable: str, ansatz: str = "linear",
                 output_dir: str = ".", geometry: Optional[str] = None, dimension: Optional[int] = None,
                 window: Optional[float] = None, bootstrap: int = 0, value: str = "mean",
                 error: str = "stderr", config: Optional[Dict] = None) -> CollapseResult:
    """
    Collapse one observable and write summary, heatmap and crossing tables.

    Args:
        report_files: Analysis reports with columns gamma, L, `value`, `error`
        observable: Name used for output files and headers
        ansatz: 'linear' or 'nonlinear'
        output_dir: Directory for the CSV outputs
        geometry: Keep only rows of this geometry
        dimension: Keep only rows of this dimension
        window: Cutoff on the rescaled variable
        bootstrap: Number of bootstrap replicas (0 disables); resamples trajectories when
            <report>_samples.csv files sit next to the reports
        config: Overrides for CollapseMinimizer
    """
    reports = load_reports(report_files, geometry, dimension)
    samples = load_samples(report_files, geometry, dimension) if value == "mean" else None
    data = CollapseInput.from_frame(reports, observable, value=value, error=error, samples=samples)
    options = dict(config or {})
    if window is not None:
        options["window"] = window

    try:
        result = minimize_collapse(data, ansatz, options)
        if bootstrap > 0:
            result.bootstrap = bootstrap_collapse(data, result, n_boot=bootstrap, window=window)
    except Exception as e:
        logger.error(f"Collapse of {observable} failed: {str(e)}")
        raise

    os.makedirs(output_dir, exist_ok=True)
    header = {
        "observable": observable, "ansatz": ansatz, "geometry": geometry or "any",
        "sizes": ",".join(f"{s:g}" for s in sorted(reports["L"].unique())),
        "window": "none" if window is None else window,
        "sources": ",".join(sorted(os.path.basename(p) for p in report_files)),
    }
    stem = f"collapse_{observable}_{ansatz}"
    provenance.write_csv(result.summary_frame(), os.path.join(output_dir, f"{stem}.csv"), header)
    provenance.write_csv(result.heatmap_frame(), os.path.join(output_dir, f"{stem}_heatmap.csv"),
                         dict(header, A=result.A))
    crossings = find_crossings(reports, value=value)
    provenance.write_csv(crossings_frame(crossings), os.path.join(output_dir, f"crossings_{observable}.csv"), header)
    return result
