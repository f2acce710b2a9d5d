"""
Fixed-point laws of the entanglement density s(l_A) = S/L.
"""
import numpy as np

from .special import dedekind_eta, digamma, jacobi_theta3

LAWS = ("page", "fermi_liquid", "lifshitz", "area")


def _page_half(l_a: int, size: int) -> float:
    if l_a == 0:
        return 0.0
    big = float(size)
    return float(
        (big - 0.5) * digamma(2 * big)
        + (0.5 + l_a - big) * digamma(2 * big - 2 * l_a)
        + (0.25 - l_a) * digamma(big)
        - 0.25 * digamma(big - l_a)
        - l_a
    )


def page_law_density(l_a, size: int):
    """
    Mean entanglement density of random Gaussian states.

    Evaluated for l_A <= L/2 and mirrored, s(l_A) = s(L - l_A), beyond.
    """
    values = np.atleast_1d(np.asarray(l_a))
    if np.any(values < 0) or np.any(values > size) or np.any(values != np.round(values)):
        raise ValueError(f"page law needs integers 0 <= l_A <= {size}, got {l_a}")
    out = np.array([_page_half(int(min(v, size - v)), size) for v in values])
    return float(out[0]) if np.ndim(l_a) == 0 else out


def fermi_liquid_density(l_a, size: int, s0: float = 0.0):
    """s = (1/3) ln[L sin(pi l_A / L)] + s0."""
    values = np.asarray(l_a, dtype=float)
    if np.any(values <= 0) or np.any(values >= size):
        raise ValueError(f"fermi-liquid law needs 0 < l_A < {size}, got {l_a}")
    return np.log(size * np.sin(np.pi * values / size)) / 3.0 + s0


def lifshitz_J(u, lam: float = 1.0):
    """
    J(u) = ln[theta3(i lam u) theta3(i lam (1-u)) / (eta(2iu) eta(2i(1-u)))].
    """
    if lam <= 0:
        raise ValueError(f"Lifshitz parameter must be positive, got {lam}")
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0) or np.any(u >= 1):
        raise ValueError("Lifshitz scaling function needs 0 < u < 1")
    v = 1.0 - u
    return np.log(
        jacobi_theta3(lam * u) * jacobi_theta3(lam * v)
        / (dedekind_eta(2.0 * u) * dedekind_eta(2.0 * v))
    )


def lifshitz_density(l_a, size: int, a: float, b: float, lam: float = 1.0):
    """s = a J(l_A / L) / L + b."""
    return a * lifshitz_J(np.asarray(l_a, dtype=float) / size, lam) / size + b


def area_law_density(l_a, constant: float):
    """Flat density."""
    return np.full(np.shape(l_a), constant, dtype=float) if np.ndim(l_a) else float(constant)
