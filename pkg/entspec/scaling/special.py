"""
Special functions for the fixed-point entanglement laws: digamma, the Jacobi
theta constant theta_3(ix) and the Dedekind eta function eta(iy).
"""
import math

import numpy as np

# B_{2k} / (2k) for k = 1..7
_ASYMPTOTIC = (1.0 / 12.0, -1.0 / 120.0, 1.0 / 252.0, -1.0 / 240.0,
               1.0 / 132.0, -691.0 / 32760.0, 1.0 / 12.0)
_RECURRENCE_LIMIT = 10.0


def _digamma_scalar(z: float) -> float:
    if not z > 0:
        raise ValueError(f"digamma is defined here for z > 0, got {z}")
    shift = 0.0
    while z <= _RECURRENCE_LIMIT:
        shift -= 1.0 / z
        z += 1.0
    inv2 = 1.0 / (z * z)
    series, power = 0.0, inv2
    for coeff in _ASYMPTOTIC:
        series += coeff * power
        power *= inv2
    return shift + math.log(z) - 0.5 / z - series


def digamma(z):
    """Psi(z) for z > 0 via upward recurrence and the asymptotic series."""
    if np.ndim(z) == 0:
        return _digamma_scalar(float(z))
    return np.array([_digamma_scalar(float(v)) for v in np.ravel(z)]).reshape(np.shape(z))


def _theta3_scalar(x: float, tol: float = 1e-15) -> float:
    if not x > 0:
        raise ValueError(f"theta_3(ix) needs x > 0, got {x}")
    total, n = 1.0, 1
    while True:
        term = 2.0 * math.exp(-math.pi * x * n * n)
        total += term
        if term < tol:
            return total
        n += 1


def jacobi_theta3(x):
    """theta_3(ix) = sum_n exp(-pi x n^2)."""
    if np.ndim(x) == 0:
        return _theta3_scalar(float(x))
    return np.array([_theta3_scalar(float(v)) for v in np.ravel(x)]).reshape(np.shape(x))


def _eta_scalar(y: float, tol: float = 1e-16) -> float:
    if not y > 0:
        raise ValueError(f"eta(iy) needs y > 0, got {y}")
    log_product, n = 0.0, 1
    while True:
        q = math.exp(-2.0 * math.pi * n * y)
        log_product += math.log1p(-q)
        if q < tol:
            break
        n += 1
    return math.exp(-math.pi * y / 12.0 + log_product)


def dedekind_eta(y):
    """eta(iy) = exp(-pi y / 12) prod_n (1 - exp(-2 pi n y))."""
    if np.ndim(y) == 0:
        return _eta_scalar(float(y))
    return np.array([_eta_scalar(float(v)) for v in np.ravel(y)]).reshape(np.shape(y))
