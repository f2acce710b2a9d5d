"""
Finite-size scaling collapse.

Data y(gamma, L) are rescaled to x = (gamma - gamma_c) L^(1/nu) (1 + A (gamma - gamma_c)).
The cost is the weighted residual of a least-squares cubic spline through the
pooled rescaled points. It is minimized by a coarse grid scan followed by a
Nelder-Mead refinement; error bars are the extent of the chi* + 4 region.
"""
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple
import logging

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.interpolate import make_lsq_spline
from scipy.optimize import brentq, minimize

from ..config import Config
from ..exceptions import CollapseError

logger = logging.getLogger(__name__)

ANSATZE = ("linear", "nonlinear")
MAX_KNOTS = 12
POINTS_PER_KNOT = 8


@dataclass
class CollapseInput:
    """Records (gamma, L, y, sigma) of one observable."""

    gamma: np.ndarray
    size: np.ndarray
    y: np.ndarray
    sigma: np.ndarray
    observable: str = "r_tilde"
    samples: Optional[List[np.ndarray]] = None

    def __post_init__(self):
        self.gamma = np.asarray(self.gamma, dtype=float)
        self.size = np.asarray(self.size, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        self.sigma = np.asarray(self.sigma, dtype=float)
        if not (self.gamma.shape == self.size.shape == self.y.shape == self.sigma.shape):
            raise CollapseError("Collapse records must have matching lengths")
        if np.any(~np.isfinite(self.sigma)) or np.any(self.sigma <= 0):
            raise CollapseError("Collapse error bars must be positive and finite")

    def validate(self, min_sizes: int = 3, min_points: int = 5) -> None:
        sizes = np.unique(self.size)
        if sizes.size < min_sizes:
            raise CollapseError(f"Collapse needs at least {min_sizes} sizes, got {sizes.size}")
        for size in sizes:
            n = np.unique(self.gamma[self.size == size]).size
            if n < min_points:
                raise CollapseError(f"Size L={size:g} has {n} gamma points; need {min_points}")

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, observable: str = "r_tilde",
                   value: str = "mean", error: str = "stderr",
                   samples: Optional[pd.DataFrame] = None) -> "CollapseInput":
        """
        Build from a report table with columns gamma, L, mean, stderr.

        `samples` holds per-trajectory values (columns gamma, L, value and optionally
        d, geometry) matched to the report rows; they are dropped with a warning when
        any row has fewer than two.
        """
        frame = frame.dropna(subset=[value, error])
        per_point = None
        if samples is not None:
            keys = [c for c in ("d", "geometry", "L", "gamma") if c in frame.columns and c in samples.columns]
            grouped = {k: g["value"].to_numpy(dtype=float) for k, g in samples.groupby(keys)}
            per_point = [grouped.get(tuple(row), np.empty(0)) for row in frame[keys].itertuples(index=False)]
            short = sum(s.size < 2 for s in per_point)
            if short:
                logger.warning(f"{short} of {len(per_point)} {observable} points have fewer than two "
                               f"trajectory samples; bootstrap falls back to Gaussian draws")
                per_point = None
        return cls(frame["gamma"].values, frame["L"].values, frame[value].values,
                   frame[error].values, observable, per_point)

    def subset(self, keep: np.ndarray) -> "CollapseInput":
        samples = None
        if self.samples is not None:
            samples = [self.samples[i] for i in np.arange(self.y.size)[keep]]
        return CollapseInput(self.gamma[keep], self.size[keep], self.y[keep], self.sigma[keep], self.observable,
                             samples)


@dataclass
class CollapseCost:
    chi2: float
    dof: int

    @property
    def per_dof(self) -> float:
        return self.chi2 / self.dof if self.dof > 0 else np.inf


@dataclass
class CollapseResult:
    """Optimum, minimal cost, contour error bars and the heatmap grid."""

    gamma_c: float
    nu: float
    A: float
    chi2_min: float
    chi2_per_dof: float
    errors: Dict[str, Tuple[float, float]]
    heatmap_gamma: np.ndarray
    heatmap_nu: np.ndarray
    heatmap_cost: np.ndarray
    converged: bool
    ansatz: str = "linear"
    observable: str = ""
    bootstrap: Dict[str, float] = field(default_factory=dict)

    def sigma(self, name: str) -> float:
        """Half width of the chi* + 4 interval."""
        lo, hi = self.errors[name]
        return 0.5 * (hi - lo)

    def summary_frame(self) -> pd.DataFrame:
        row = {
            "observable": self.observable, "ansatz": self.ansatz,
            "gamma_c": self.gamma_c, "gamma_c_err": self.sigma("gamma_c"),
            "nu": self.nu, "nu_err": self.sigma("nu"),
            "A": self.A, "A_err": self.sigma("A") if "A" in self.errors else 0.0,
            "chi2_min": self.chi2_min, "chi2_per_dof": self.chi2_per_dof,
            "converged": self.converged,
        }
        row.update({f"bootstrap_{k}": v for k, v in self.bootstrap.items()})
        return pd.DataFrame([row])

    def heatmap_frame(self, truncate: float = 4.0) -> pd.DataFrame:
        """Normalized cost chi/chi* on the (gamma_c, nu) grid, truncated at `truncate`."""
        g, n = np.meshgrid(self.heatmap_gamma, self.heatmap_nu, indexing="ij")
        ratio = self.heatmap_cost / self.chi2_min if self.chi2_min > 0 else self.heatmap_cost
        return pd.DataFrame({"gamma_c": g.ravel(), "nu": n.ravel(),
                             "normalized_cost": np.minimum(ratio, truncate).ravel()})


@dataclass
class CombinedEstimate:
    gamma_c: float
    gamma_c_err: float
    nu: float
    nu_err: float


def rescale(data: CollapseInput, gamma_c: float, nu: float, A: float = 0.0):
    """
    Scaling variable x = d L^(1/nu) (1 + A d) with d = gamma - gamma_c.

    Returns:
        (x, y, sigma) sorted by x
    """
    if nu <= 0:
        raise ValueError(f"nu must be positive, got {nu}")
    delta = data.gamma - gamma_c
    x = delta * data.size ** (1.0 / nu) * (1.0 + A * delta)
    order = np.argsort(x, kind="stable")
    return x[order], data.y[order], data.sigma[order]


def collapse_cost(x: np.ndarray, y: np.ndarray, sigma: np.ndarray) -> CollapseCost:
    """
    Weighted residual chi^2 of a cubic least-squares spline through (x, y).

    Uses min(12, ceil(n/8)) interior knots at quantiles of x and weights 1/sigma^2.
    Degenerate abscissae give an infinite cost.
    """
    x, y, sigma = (np.asarray(a, dtype=float) for a in (x, y, sigma))
    n = x.size
    if n < 10:
        raise ValueError(f"Collapse cost needs at least 10 points, got {n}")
    order = np.argsort(x, kind="stable")
    x, y, sigma = x[order], y[order], sigma[order]

    n_knots = min(MAX_KNOTS, int(np.ceil(n / POINTS_PER_KNOT)))
    if not np.isfinite(x).all() or x[-1] - x[0] <= 0:
        return CollapseCost(np.inf, n - n_knots - 4)

    interior = np.quantile(x, np.linspace(0.0, 1.0, n_knots + 2)[1:-1])
    interior = np.unique(interior[(interior > x[0]) & (interior < x[-1])])
    knots = np.concatenate([[x[0]] * 4, interior, [x[-1]] * 4])
    dof = n - (interior.size + 4)

    try:
        spline = make_lsq_spline(x, y, knots, k=3, w=1.0 / sigma)
    except (ValueError, np.linalg.LinAlgError):
        return CollapseCost(np.inf, dof)
    chi2 = float(np.sum(((y - spline(x)) / sigma) ** 2))
    return CollapseCost(chi2 if np.isfinite(chi2) else np.inf, dof)


def _window(data: CollapseInput, gamma_c: float, nu: float, cutoff: Optional[float]) -> CollapseInput:
    if cutoff is None:
        return data
    keep = np.abs(data.gamma - gamma_c) * data.size ** (1.0 / nu) < cutoff
    return data.subset(keep)


def total_cost(data: CollapseInput, gamma_c: float, nu: float, A: float = 0.0,
               window: Optional[float] = None) -> float:
    if nu <= 0:
        return np.inf
    subset = _window(data, gamma_c, nu, window)
    if subset.y.size < 10:
        return np.inf
    return collapse_cost(*rescale(subset, gamma_c, nu, A)).chi2


def _grid_row(data, gamma_c, nus, a_values, window):
    row = np.empty((nus.size, a_values.size))
    for j, nu in enumerate(nus):
        for k, a in enumerate(a_values):
            row[j, k] = total_cost(data, gamma_c, nu, a, window)
    return row


def _contour_extent(profile, center: float, lo: float, hi: float, level: float) -> Tuple[float, float]:
    """Bounds of {profile <= level} around center, clipped to [lo, hi]."""
    def excess(v: float) -> float:
        return min(profile(v), 1e300) - level

    def crossing(edge: float) -> float:
        if excess(edge) <= 0:
            return edge
        try:
            return brentq(excess, center, edge, xtol=1e-6)
        except ValueError:
            return center
    return crossing(lo), crossing(hi)


class CollapseMinimizer:
    """Grid scan plus simplex refinement of the collapse cost."""

    def __init__(self, config: Optional[Dict] = None):
        """
        Initialize with configuration.

        Args:
            config: Parameters including:
                - gamma_points: Grid points in gamma_c (default 41)
                - gamma_range: (lo, hi) for gamma_c (default data range)
                - nu_range, nu_points: Grid in nu
                - a_range, a_points: Grid in A (nonlinear ansatz)
                - window: Optional cutoff on |gamma - gamma_c| L^(1/nu)
                - contour: Cost increase defining error bars (default 4)
                - n_jobs: Parallel workers for the grid scan
        """
        self.config = dict(Config.get_collapse_config())
        self.config.update(config or {})
        self.logger = logging.getLogger("CollapseMinimizer")

    def minimize(self, data: CollapseInput, ansatz: str = "linear") -> CollapseResult:
        if ansatz not in ANSATZE:
            raise ValueError(f"Unknown ansatz '{ansatz}'. Valid: {', '.join(ANSATZE)}")
        data.validate()
        cfg = self.config
        window = cfg.get("window")

        gamma_range = cfg.get("gamma_range") or (float(data.gamma.min()), float(data.gamma.max()))
        gammas = np.linspace(*gamma_range, cfg["gamma_points"])
        nus = np.linspace(*cfg["nu_range"], cfg["nu_points"])
        a_values = np.linspace(*cfg["a_range"], cfg["a_points"]) if ansatz == "nonlinear" else np.zeros(1)

        rows = Parallel(n_jobs=cfg.get("n_jobs", 1))(
            delayed(_grid_row)(data, g, nus, a_values, window) for g in gammas
        )
        grid = np.array(rows)
        if not np.isfinite(grid).any():
            raise CollapseError("Collapse cost is infinite on the whole grid")

        i, j, k = np.unravel_index(np.nanargmin(grid), grid.shape)
        on_boundary = i in (0, gammas.size - 1) or j in (0, nus.size - 1)
        if ansatz == "nonlinear":
            on_boundary = on_boundary or k in (0, a_values.size - 1)

        def objective(p):
            a = p[2] if ansatz == "nonlinear" else 0.0
            return total_cost(data, p[0], p[1], a, window)

        start = [gammas[i], nus[j]] + ([a_values[k]] if ansatz == "nonlinear" else [])
        refined = minimize(objective, np.array(start), method="Nelder-Mead",
                           options={"xatol": 1e-5, "fatol": 1e-8, "maxiter": 2000})
        best = refined.x if refined.fun <= grid[i, j, k] else np.array(start)
        chi2_min = float(objective(best))
        gamma_c, nu = float(best[0]), float(best[1])
        a_opt = float(best[2]) if ansatz == "nonlinear" else 0.0

        outside = not (gammas[0] <= gamma_c <= gammas[-1] and nus[0] <= nu <= nus[-1])
        converged = not (on_boundary or outside)
        if not converged:
            self.logger.warning(f"Collapse optimum for {data.observable} lies on the grid boundary "
                                f"(gamma_c={gamma_c:.4f}, nu={nu:.4f}); result flagged non-converged")

        level = chi2_min + cfg["contour"]
        errors = {
            "gamma_c": _contour_extent(lambda v: total_cost(data, v, nu, a_opt, window),
                                       gamma_c, gammas[0], gammas[-1], level),
            "nu": _contour_extent(lambda v: total_cost(data, gamma_c, v, a_opt, window),
                                  nu, nus[0], nus[-1], level),
        }
        if ansatz == "nonlinear":
            errors["A"] = _contour_extent(lambda v: total_cost(data, gamma_c, nu, v, window),
                                          a_opt, a_values[0], a_values[-1], level)
            heat = np.array(Parallel(n_jobs=cfg.get("n_jobs", 1))(
                delayed(_grid_row)(data, g, nus, np.array([a_opt]), window) for g in gammas
            ))[:, :, 0]
        else:
            heat = grid[:, :, 0]

        subset = _window(data, gamma_c, nu, window)
        dof = collapse_cost(*rescale(subset, gamma_c, nu, a_opt)).dof if subset.y.size >= 10 else 0

        self.logger.info(f"Collapse of {data.observable} ({ansatz}): gamma_c={gamma_c:.4f}, nu={nu:.4f}, "
                         f"A={a_opt:.4f}, chi2*={chi2_min:.3f}")
        return CollapseResult(
            gamma_c=gamma_c, nu=nu, A=a_opt, chi2_min=chi2_min,
            chi2_per_dof=chi2_min / dof if dof > 0 else np.inf,
            errors=errors, heatmap_gamma=gammas, heatmap_nu=nus, heatmap_cost=heat,
            converged=converged, ansatz=ansatz, observable=data.observable,
        )


def minimize_collapse(data: CollapseInput, ansatz: str = "linear",
                      config: Optional[Dict] = None) -> CollapseResult:
    """Estimate (gamma_c, nu[, A]) for one observable."""
    return CollapseMinimizer(config).minimize(data, ansatz)


def bootstrap_collapse(data: CollapseInput, result: CollapseResult, n_boot: int = 100,
                       seed: int = 0, window: Optional[float] = None) -> Dict[str, float]:
    """
    Bootstrap spread of (gamma_c, nu) around an existing optimum.

    Resamples per-point trajectory values when `data.samples` is set, otherwise
    draws y ~ N(y, sigma). Each replica is refined from the original optimum.
    """
    rng = np.random.default_rng(seed)
    start = [result.gamma_c, result.nu] + ([result.A] if result.ansatz == "nonlinear" else [])
    estimates = []
    for _ in range(n_boot):
        if data.samples is not None:
            draws = [rng.choice(s, size=len(s), replace=True) for s in data.samples]
            y = np.array([d.mean() for d in draws])
            sigma = np.array([max(d.std(ddof=1) / np.sqrt(len(d)), 1e-12) for d in draws])
        else:
            y, sigma = rng.normal(data.y, data.sigma), data.sigma
        replica = CollapseInput(data.gamma, data.size, y, sigma, data.observable)

        def objective(p):
            a = p[2] if result.ansatz == "nonlinear" else 0.0
            return total_cost(replica, p[0], p[1], a, window)

        fit = minimize(objective, np.array(start), method="Nelder-Mead",
                       options={"xatol": 1e-5, "fatol": 1e-8, "maxiter": 1000})
        estimates.append(fit.x[:2])

    estimates = np.array(estimates)
    return {
        "gamma_c_mean": float(estimates[:, 0].mean()), "gamma_c_std": float(estimates[:, 0].std(ddof=1)),
        "nu_mean": float(estimates[:, 1].mean()), "nu_std": float(estimates[:, 1].std(ddof=1)),
        "n_boot": n_boot,
        "n_samples": 0 if data.samples is None else int(sum(len(s) for s in data.samples)),
    }


def weighted_average_estimates(estimates: Iterable) -> CombinedEstimate:
    """
    Inverse-variance average of (gamma_c, nu) over several collapses.

    Accepts CollapseResult objects or (gamma_c, gamma_c_err, nu, nu_err) tuples.
    """
    rows = []
    for est in estimates:
        if isinstance(est, CollapseResult):
            rows.append((est.gamma_c, est.sigma("gamma_c"), est.nu, est.sigma("nu")))
        else:
            rows.append(tuple(float(v) for v in est))
    if not rows:
        raise ValueError("Weighted average needs at least one estimate")
    values = np.array(rows)

    def combine(v: np.ndarray, err: np.ndarray) -> Tuple[float, float]:
        if np.any(~np.isfinite(err)) or np.any(err <= 0):
            raise ValueError(f"Weighted average needs positive finite errors, got {err.tolist()}")
        w = 1.0 / err ** 2
        return float(np.sum(w * v) / np.sum(w)), float(1.0 / np.sqrt(np.sum(w)))

    gamma_c, gamma_c_err = combine(values[:, 0], values[:, 1])
    nu, nu_err = combine(values[:, 2], values[:, 3])
    return CombinedEstimate(gamma_c, gamma_c_err, nu, nu_err)
