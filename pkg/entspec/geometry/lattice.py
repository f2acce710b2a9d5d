"""
Periodic hypercubic lattices.

Sites are indexed row-major with x fastest: index = x1 + L*x2 + L^2*x3.
"""
from dataclasses import dataclass
from typing import Tuple
import logging

import numpy as np

logger = logging.getLogger(__name__)

SUPPORTED_DIMENSIONS = (1, 2, 3)


@dataclass(frozen=True)
class LatticeSpec:
    """Periodic hypercubic lattice of linear size L in d dimensions."""

    dimension: int
    size: int
    boundary: str = "periodic"

    @property
    def n_sites(self) -> int:
        return self.size ** self.dimension

    @property
    def n_particles(self) -> int:
        """Particle number at half filling."""
        return self.n_sites // 2

    def coordinates(self) -> np.ndarray:
        """Integer coordinates of every site, shape (V, d), x fastest."""
        idx = np.arange(self.n_sites)
        return np.stack([(idx // self.size ** k) % self.size for k in range(self.dimension)], axis=1)

    def site_index(self, coords: np.ndarray) -> np.ndarray:
        """Inverse of coordinates(); coordinates are wrapped periodically."""
        coords = np.mod(np.atleast_2d(coords), self.size)
        weights = self.size ** np.arange(self.dimension)
        return coords @ weights

    def parity(self) -> np.ndarray:
        """Sublattice parity (x1 + ... + xd) mod 2 of every site."""
        return self.coordinates().sum(axis=1) % 2

    def descriptor(self) -> str:
        return f"d={self.dimension} L={self.size} boundary={self.boundary}"


def _validate(dimension: int, size: int) -> None:
    if dimension not in SUPPORTED_DIMENSIONS:
        raise ValueError(f"Unsupported dimension {dimension}; expected one of {SUPPORTED_DIMENSIONS}")
    if size < 2:
        raise ValueError(f"Linear size must be at least 2, got {size}")
    if size % 2:
        raise ValueError(f"Linear size must be even for half filling, got {size}")
    if dimension >= 2 and size < 4:
        # L=2 doubles every bond under periodic wrap
        raise ValueError(f"Linear size must be at least 4 for d={dimension}, got {size}")


def build_lattice(dimension: int, size: int) -> Tuple[LatticeSpec, np.ndarray]:
    """
    Build a lattice and its nearest-neighbour hopping matrix.

    Args:
        dimension: Spatial dimension d (1, 2 or 3)
        size: Linear size L (even; L >= 4 when d >= 2)

    Returns:
        Tuple of (lattice, hopping) with hopping a real symmetric V x V matrix
        holding -1 on periodic nearest-neighbour bonds.
    """
    _validate(dimension, size)
    lattice = LatticeSpec(dimension=dimension, size=size)

    coords = lattice.coordinates()
    sites = np.arange(lattice.n_sites)
    hopping = np.zeros((lattice.n_sites, lattice.n_sites))
    for axis in range(dimension):
        shifted = coords.copy()
        shifted[:, axis] += 1
        neighbours = lattice.site_index(shifted)
        # assignment, not accumulation: the d=1, L=2 ring has a single bond
        hopping[sites, neighbours] = -1.0
        hopping[neighbours, sites] = -1.0

    logger.debug(f"Built hopping matrix for {lattice.descriptor()} with {int(np.count_nonzero(hopping)) // 2} bonds")
    return lattice, hopping


def hopping_spectrum(lattice: LatticeSpec) -> np.ndarray:
    """Analytic band energies -2 sum_i cos(2 pi k_i / L), sorted ascending."""
    k = 2.0 * np.pi * lattice.coordinates() / lattice.size
    return np.sort(-2.0 * np.cos(k).sum(axis=1))
