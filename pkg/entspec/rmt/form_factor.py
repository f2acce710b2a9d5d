"""
Filtered spectral form factor and the Thouless time.
"""
from dataclasses import dataclass, field
from typing import Optional
import logging

import numpy as np
import pandas as pd

from ..config import Config
from .unfolding import UnfoldedEnsemble

logger = logging.getLogger(__name__)

DEFAULT_TAUS = np.logspace(-3, 1, 241)


@dataclass
class SFFCurve:
    """K(t) averaged over trajectories, with tau = t / T_H."""

    times: np.ndarray
    values: np.ndarray
    heisenberg_time: float
    mean_spacing: float
    n_trajectories: int
    metadata: dict = field(default_factory=dict)
    samples: Optional[np.ndarray] = None  # (n_trajectories, n_times) per-trajectory K

    @property
    def taus(self) -> np.ndarray:
        return self.times / self.heisenberg_time

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.times, "tau": self.taus, "K": self.values})


@dataclass
class ThoulessTime:
    tau: float
    converged: bool


def gue_form_factor(tau: np.ndarray) -> np.ndarray:
    """K_GUE(tau) = tau for tau < 1 and 1 beyond."""
    return np.minimum(np.asarray(tau, dtype=float), 1.0)


def gaussian_filter(levels: np.ndarray, eta: float) -> np.ndarray:
    """exp(-(e - mean)^2 / (2 (eta * std)^2)); flat when the spread vanishes."""
    width = eta * levels.std()
    if width == 0.0:
        return np.ones_like(levels)
    return np.exp(-0.5 * ((levels - levels.mean()) / width) ** 2)


def _window_spacing(levels: np.ndarray, eta: float) -> Optional[np.ndarray]:
    width = eta * levels.std()
    inside = levels[np.abs(levels - levels.mean()) <= width] if width > 0 else levels
    return np.diff(inside) if inside.size > 1 else None


def spectral_form_factor(unfolded: UnfoldedEnsemble, taus: Optional[np.ndarray] = None,
                         eta: float = Config.SFF_ETA) -> SFFCurve:
    """
    K(t) = <|sum_a g(e_a) exp(i e_a t)|^2 / sum_a g(e_a)^2> over trajectories.

    Args:
        unfolded: Unfolded ensemble
        taus: Rescaled time grid (default log-spaced on [1e-3, 10])
        eta: Filter width in units of the per-trajectory level spread

    Returns:
        SFFCurve with T_H = 2 pi / mean unfolded spacing in the filter window
    """
    members = [np.asarray(lv, dtype=float) for lv in unfolded.levels if np.size(lv) > 0]
    if not members:
        raise ValueError("Spectral form factor needs at least one non-empty spectrum")

    spacings = [sp for sp in (_window_spacing(lv, eta) for lv in members) if sp is not None]
    if spacings:
        mean_spacing = float(np.concatenate(spacings).mean())
    else:
        logger.warning("No level spacing inside the filter window; assuming unit spacing")
        mean_spacing = 1.0
    heisenberg_time = 2.0 * np.pi / mean_spacing

    taus = DEFAULT_TAUS if taus is None else np.asarray(taus, dtype=float)
    times = taus * heisenberg_time

    samples = np.empty((len(members), times.size))
    for row, levels in enumerate(members):
        weights = gaussian_filter(levels, eta)
        norm = np.sum(weights ** 2)
        if norm == 0.0:
            raise ValueError("Empty filter window")
        phases = np.exp(1j * np.outer(times, levels))
        samples[row] = np.abs(phases @ weights) ** 2 / norm

    return SFFCurve(times=times, values=samples.mean(axis=0), heisenberg_time=heisenberg_time,
                    mean_spacing=mean_spacing, n_trajectories=len(members),
                    metadata=dict(unfolded.metadata), samples=samples)


def _log_window(taus: np.ndarray, half_width: float) -> np.ndarray:
    """Row-normalized box window over |ln tau_k - ln tau_i| <= half_width."""
    log_tau = np.log(taus)
    window = (np.abs(log_tau[:, None] - log_tau[None, :]) <= half_width).astype(float)
    return window / window.sum(axis=1, keepdims=True)


def thouless_time(sff: SFFCurve, tolerance: float = Config.THOULESS_TOLERANCE,
                  smoothing: float = Config.THOULESS_SMOOTHING,
                  noise_sigmas: float = Config.THOULESS_NOISE_SIGMAS) -> ThoulessTime:
    """
    Earliest tau from which the smoothed K stays on the GUE ramp up to tau = 1.

    K and K_GUE are both averaged over a window of half-width `smoothing` in ln tau.
    A point agrees with the ramp when |ln K - ln K_GUE| is below a band of
    max(tolerance, noise_sigmas * relative standard error of K), the error taken from
    the per-trajectory curves when they are available. Points within exp(-2 band) of
    tau = 1 cannot separate the ramp from the plateau; agreement that starts only
    there is reported as tau = 1, not converged.

    Args:
        sff: Form-factor curve
        tolerance: Smallest accepted log deviation
        smoothing: Half-width of the ln tau window (0 disables smoothing)
        noise_sigmas: Width of the noise band in standard errors

    Returns:
        ThoulessTime
    """
    positive = sff.taus > 0.0
    taus = sff.taus[positive]
    if not np.any(taus <= 1.0):
        raise ValueError("Form-factor grid has no point with tau <= 1")

    window = _log_window(taus, smoothing)
    smoothed = window @ sff.values[positive]
    reference = window @ gue_form_factor(taus)

    band = np.full(taus.size, float(tolerance))
    if sff.samples is not None and sff.samples.shape[0] > 1:
        per_trajectory = sff.samples[:, positive] @ window.T
        stderr = per_trajectory.std(axis=0, ddof=1) / np.sqrt(per_trajectory.shape[0])
        with np.errstate(divide="ignore", invalid="ignore"):
            relative = np.where(smoothed > 0.0, stderr / smoothed, np.inf)
        band = np.maximum(band, noise_sigmas * relative)

    ramp = taus <= 1.0
    taus, smoothed, reference, band = taus[ramp], smoothed[ramp], reference[ramp], band[ramp]

    with np.errstate(divide="ignore"):
        close = np.abs(np.log(smoothed) - np.log(reference)) < band
    resolvable = taus < np.exp(-2.0 * band)

    failing = np.flatnonzero(resolvable & ~close)
    start = 0 if failing.size == 0 else failing[-1] + 1
    candidates = np.flatnonzero(resolvable[start:])
    if candidates.size == 0:
        logger.info("Form factor never joins the GUE ramp; Thouless time capped at 1")
        return ThoulessTime(tau=1.0, converged=False)
    return ThoulessTime(tau=float(taus[start + candidates[0]]), converged=True)


def thouless_time_blocks(unfolded: UnfoldedEnsemble, n_blocks: int = 10, taus: Optional[np.ndarray] = None,
                         eta: float = Config.SFF_ETA,
                         tolerance: float = Config.THOULESS_TOLERANCE,
                         smoothing: float = Config.THOULESS_SMOOTHING,
                         noise_sigmas: float = Config.THOULESS_NOISE_SIGMAS):
    """
    Thouless time of the full ensemble with a block-scatter standard error.

    Returns:
        (ThoulessTime of the full ensemble, standard error over disjoint trajectory blocks)
    """
    full = thouless_time(spectral_form_factor(unfolded, taus, eta), tolerance, smoothing, noise_sigmas)
    n_blocks = min(n_blocks, len(unfolded))
    if n_blocks < 2:
        return full, np.nan
    blocks = np.array_split(np.arange(len(unfolded)), n_blocks)
    estimates = []
    for block in blocks:
        subset = UnfoldedEnsemble([unfolded.levels[i] for i in block], unfolded.staircase,
                                  unfolded.method, unfolded.metadata)
        estimates.append(thouless_time(spectral_form_factor(subset, taus, eta), tolerance,
                                       smoothing, noise_sigmas).tau)
    estimates = np.asarray(estimates)
    return full, float(estimates.std(ddof=1) / np.sqrt(n_blocks))
