"""
Crossing points of observable curves for consecutive system sizes.
"""
from dataclasses import dataclass
from typing import List
import logging

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)


@dataclass
class Crossing:
    size_small: float
    size_large: float
    gamma: float


def find_crossings(frame: pd.DataFrame, value: str = "mean") -> List[Crossing]:
    """
    Gamma at which y(gamma, L) and y(gamma, L') cross, for consecutive sizes L < L'.

    Both curves are interpolated linearly on their common gamma grid; the first
    sign change of the difference is reported. Pairs without a crossing are skipped.

    Args:
        frame: Report table with columns gamma, L and `value`
    """
    sizes = np.sort(frame["L"].unique())
    crossings = []
    for small, large in zip(sizes[:-1], sizes[1:]):
        a = frame[frame["L"] == small].sort_values("gamma")
        b = frame[frame["L"] == large].sort_values("gamma")
        gammas = np.intersect1d(a["gamma"].values, b["gamma"].values)
        if gammas.size < 2:
            logger.warning(f"Sizes {small:g} and {large:g} share fewer than two gamma points")
            continue
        diff = (np.interp(gammas, b["gamma"].values, b[value].values)
                - np.interp(gammas, a["gamma"].values, a[value].values))
        change = np.flatnonzero(np.sign(diff[:-1]) * np.sign(diff[1:]) <= 0)
        if change.size == 0:
            logger.info(f"No crossing between L={small:g} and L={large:g}")
            continue
        i = change[0]
        if diff[i] == diff[i + 1]:
            gamma = gammas[i]
        else:
            gamma = gammas[i] - diff[i] * (gammas[i + 1] - gammas[i]) / (diff[i + 1] - diff[i])
        crossings.append(Crossing(float(small), float(large), float(gamma)))
    return crossings


def crossings_frame(crossings: List[Crossing]) -> pd.DataFrame:
    return pd.DataFrame([c.__dict__ for c in crossings], columns=["size_small", "size_large", "gamma"])


def is_monotone_drift(crossings: List[Crossing], decreasing: bool = True) -> bool:
    """True when crossing points move monotonically with increasing size."""
    gammas = np.array([c.gamma for c in crossings])
    if gammas.size < 2:
        return False
    steps = np.diff(gammas)
    return bool(np.all(steps < 0) if decreasing else np.all(steps > 0))
