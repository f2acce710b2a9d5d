"""
Least-squares fits of entanglement curves to the fixed-point laws, growth laws
for s(t), and extraction of the L ln L prefactor from a ladder of sizes.
"""
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional
import logging

import numpy as np
from scipy.optimize import minimize

from ..observables.series import ObservableSeries
from .laws import LAWS, fermi_liquid_density, lifshitz_J, page_law_density

logger = logging.getLogger(__name__)

LIFSHITZ_GRID = np.linspace(0.2, 3.0, 57)
GROWTH_LAWS = ("linear", "logarithmic")


@dataclass
class ScalingLawFit:
    """Fitted parameters and residual of one law."""

    law: str
    params: Dict[str, float] = field(default_factory=dict)
    residual_rms: float = np.nan
    success: bool = True
    message: str = ""

    def as_row(self) -> Dict[str, float]:
        row = {"law": self.law, "residual_rms": self.residual_rms, "success": self.success}
        row.update(self.params)
        return row


@dataclass
class PrefactorResult:
    """Per-size fits S/L = c ln L + b and the 1/L extrapolation of c."""

    sizes: np.ndarray
    c: np.ndarray
    b: np.ndarray
    c_infinity: float
    slope: float


def _weights(stderr: np.ndarray) -> np.ndarray:
    stderr = np.asarray(stderr, dtype=float)
    if np.all(np.isfinite(stderr)) and np.all(stderr > 0):
        return 1.0 / stderr ** 2
    logger.warning("Missing or zero error bars; falling back to uniform weights")
    return np.ones_like(stderr)


def _rms(residual: np.ndarray) -> float:
    return float(np.sqrt(np.mean(residual ** 2)))


def _weighted_linear(design: np.ndarray, y: np.ndarray, w: np.ndarray):
    """Weighted linear least squares; returns (coefficients, weighted chi^2, rank)."""
    sw = np.sqrt(w)
    coeffs, _, rank, _ = np.linalg.lstsq(design * sw[:, None], y * sw, rcond=None)
    chi2 = float(np.sum(w * (y - design @ coeffs) ** 2))
    return coeffs, chi2, rank


def _fit_lifshitz(x: np.ndarray, y: np.ndarray, w: np.ndarray, size: int) -> ScalingLawFit:
    u = x / size

    def profile(lam: float):
        design = np.column_stack([lifshitz_J(u, lam) / size, np.ones_like(u)])
        return _weighted_linear(design, y, w)

    best_lam, best = None, None
    for lam in LIFSHITZ_GRID:
        coeffs, chi2, rank = profile(lam)
        if rank < 2:
            continue
        if best is None or chi2 < best[1]:
            best_lam, best = lam, (coeffs, chi2)
    if best is None:
        return ScalingLawFit("lifshitz", success=False, message="singular normal equations")

    def cost(p):
        a, b, log_lam = p
        model = a * lifshitz_J(u, np.exp(log_lam)) / size + b
        return float(np.sum(w * (y - model) ** 2))

    start = np.array([best[0][0], best[0][1], np.log(best_lam)])
    polished = minimize(cost, start, method="Nelder-Mead", options={"xatol": 1e-8, "fatol": 1e-12, "maxiter": 4000})
    a, b, log_lam = polished.x if polished.fun <= best[1] else start
    lam = float(np.exp(log_lam))
    residual = y - (a * lifshitz_J(u, lam) / size + b)
    return ScalingLawFit("lifshitz", {"a": float(a), "b": float(b), "lambda": lam}, _rms(residual),
                         success=True, message=str(polished.message))


def fit_scaling_law(series: ObservableSeries, law: str, size: int,
                    offset_match: bool = False) -> ScalingLawFit:
    """
    Fit an entanglement-density curve s(l_A) to one of the fixed-point laws.

    Args:
        series: Curve over l_A with error bars (at least 5 points)
        law: 'page', 'fermi_liquid', 'lifshitz' or 'area'
        size: Linear system size L
        offset_match: For 'page', shift the data to agree with the law at l_A = L/2
    """
    if law not in LAWS:
        raise ValueError(f"Unknown law '{law}'. Valid laws are: {', '.join(LAWS)}")
    if series.x.size < 5:
        raise ValueError(f"Scaling-law fits need at least 5 points, got {series.x.size}")

    x, y = series.x, series.mean
    w = _weights(series.stderr)

    if law == "page":
        model = page_law_density(np.round(x).astype(int), size)
        params = {}
        if offset_match:
            mid = int(np.argmin(np.abs(x - size / 2)))
            shift = model[mid] - y[mid]
            y = y + shift
            params["offset"] = float(shift)
        residual = y - model
        with np.errstate(divide="ignore", invalid="ignore"):
            params["max_relative_deviation"] = float(np.max(np.abs(residual / model)[model != 0]))
        return ScalingLawFit("page", params, _rms(residual))

    if law == "fermi_liquid":
        base = fermi_liquid_density(x, size)
        s0 = float(np.sum(w * (y - base)) / np.sum(w))
        return ScalingLawFit("fermi_liquid", {"s0": s0}, _rms(y - base - s0))

    if law == "area":
        constant = float(np.sum(w * y) / np.sum(w))
        return ScalingLawFit("area", {"constant": constant}, _rms(y - constant))

    return _fit_lifshitz(x, y, w, size)


def fit_growth_law(times: np.ndarray, values: np.ndarray, law: str,
                   stderr: Optional[np.ndarray] = None) -> ScalingLawFit:
    """
    Fit s(t) to v t + c ('linear') or k ln t + c ('logarithmic').

    The logarithmic prefactor k is 1/3 at the Fermi-liquid point.
    """
    if law not in GROWTH_LAWS:
        raise ValueError(f"Unknown growth law '{law}'. Valid: {', '.join(GROWTH_LAWS)}")
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = times > 0 if law == "logarithmic" else np.ones_like(times, dtype=bool)
    if np.count_nonzero(keep) < 3:
        raise ValueError("Growth-law fits need at least 3 usable times")

    t, s = times[keep], values[keep]
    w = np.ones_like(t) if stderr is None else _weights(np.asarray(stderr)[keep])
    regressor = t if law == "linear" else np.log(t)
    coeffs, _, _ = _weighted_linear(np.column_stack([regressor, np.ones_like(t)]), s, w)
    key = "velocity" if law == "linear" else "prefactor"
    residual = s - (coeffs[0] * regressor + coeffs[1])
    return ScalingLawFit(law, {key: float(coeffs[0]), "intercept": float(coeffs[1])}, _rms(residual))


def prefactor_extraction(entropies: Mapping[int, float]) -> PrefactorResult:
    """
    Extract c in S = c L ln L + b L from half-cut entropies on a ladder of sizes.

    For every size L the fit S/L~ = c ln L~ + b uses all even sizes L~ <= L in the
    ladder; c(L) is then extrapolated linearly in 1/L.

    Args:
        entropies: Mapping size -> mean half-cut entropy
    """
    sizes = np.array(sorted(k for k in entropies if k % 2 == 0 and k >= 2))
    if sizes.size < 3:
        raise ValueError(f"Prefactor extraction needs at least 3 sizes, got {sizes.size}")
    density = np.array([entropies[k] for k in sizes]) / sizes

    fitted_sizes, c, b = [], [], []
    for i in range(1, sizes.size):
        slope, intercept = np.polyfit(np.log(sizes[: i + 1]), density[: i + 1], 1)
        fitted_sizes.append(sizes[i])
        c.append(slope)
        b.append(intercept)

    fitted_sizes = np.array(fitted_sizes)
    c, b = np.array(c), np.array(b)
    m, c_inf = np.polyfit(1.0 / fitted_sizes, c, 1)
    return PrefactorResult(sizes=fitted_sizes, c=c, b=b, c_infinity=float(c_inf), slope=float(m))
