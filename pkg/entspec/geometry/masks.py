"""
Subsystem masks: strips, half cuts, checkerboards and custom site lists.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Optional
import logging

import numpy as np

from .lattice import LatticeSpec

logger = logging.getLogger(__name__)

GEOMETRIES = ("strip", "half_cut", "checkerboard", "custom")


@dataclass(frozen=True)
class SubsystemMask:
    """Ordered, duplicate-free list of lattice sites forming a subsystem A."""

    sites: np.ndarray
    geometry: str
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        sites = np.asarray(self.sites, dtype=np.int64)
        if sites.ndim != 1 or sites.size == 0:
            raise ValueError("Mask must be a non-empty 1D list of sites")
        if np.any(np.diff(sites) <= 0):
            raise ValueError("Mask sites must be strictly increasing")
        sites.setflags(write=False)
        object.__setattr__(self, "sites", sites)

    @property
    def size(self) -> int:
        return int(self.sites.size)

    def complement(self, lattice: LatticeSpec) -> "SubsystemMask":
        rest = np.setdiff1d(np.arange(lattice.n_sites), self.sites)
        return SubsystemMask(rest, "custom", {"complement_of": self.descriptor()})

    def descriptor(self) -> str:
        if self.geometry == "custom":
            return "custom sites=" + ",".join(str(s) for s in self.sites)
        params = " ".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.geometry} {params}".strip()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SubsystemMask):
            return NotImplemented
        return np.array_equal(self.sites, other.sites)

    def __hash__(self) -> int:
        return hash(self.sites.tobytes())


def _strip(lattice: LatticeSpec, width: int, offset: int = 0) -> np.ndarray:
    if not 1 <= width <= lattice.size - 1:
        raise ValueError(f"Strip width must lie in [1, {lattice.size - 1}], got {width}")
    columns = (lattice.coordinates()[:, 0] - offset) % lattice.size
    return np.flatnonzero(columns < width)


def make_mask(lattice: LatticeSpec, geometry: str, **params: Any) -> SubsystemMask:
    """
    Create a subsystem mask.

    Args:
        lattice: Lattice the mask lives on
        geometry: One of GEOMETRIES
        params: strip takes width (l_A) and optional offset; custom takes sites

    Returns:
        SubsystemMask
    """
    if geometry == "strip":
        width = int(params["width"])
        offset = int(params.get("offset", 0))
        sites = _strip(lattice, width, offset)
        mask_params: Dict[str, Any] = {"width": width}
        if offset:
            mask_params["offset"] = offset
        return SubsystemMask(sites, "strip", mask_params)

    if geometry == "half_cut":
        return SubsystemMask(_strip(lattice, lattice.size // 2), "half_cut", {})

    if geometry == "checkerboard":
        if lattice.size % 2:
            raise ValueError("Checkerboard requires even L")
        # odd parity: even columns in odd rows and odd columns in even rows
        return SubsystemMask(np.flatnonzero(lattice.parity() == 1), "checkerboard", {})

    if geometry == "custom":
        sites = np.unique(np.asarray(list(params["sites"]), dtype=np.int64))
        if sites.size and (sites[0] < 0 or sites[-1] >= lattice.n_sites):
            raise ValueError(f"Custom mask sites must lie in [0, {lattice.n_sites})")
        return SubsystemMask(sites, "custom", {})

    raise ValueError(f"Unknown geometry '{geometry}'. Valid geometries are: {', '.join(GEOMETRIES)}")


def mask_from_descriptor(lattice: LatticeSpec, descriptor: str) -> SubsystemMask:
    """Rebuild a mask from the text written by SubsystemMask.descriptor()."""
    parts = descriptor.split()
    geometry, params = parts[0], dict(p.split("=", 1) for p in parts[1:])
    if geometry == "custom":
        return make_mask(lattice, "custom", sites=[int(s) for s in params["sites"].split(",")])
    return make_mask(lattice, geometry, **{k: int(v) for k, v in params.items()})


def parse_geometry(lattice: LatticeSpec, token: str) -> SubsystemMask:
    """Parse a config token such as 'half_cut', 'checkerboard' or 'strip:3'."""
    name, _, arg = token.partition(":")
    if name == "strip":
        if not arg:
            raise ValueError("strip geometry needs a width, e.g. 'strip:3'")
        return make_mask(lattice, "strip", width=int(arg))
    return make_mask(lattice, name)


def strip_sweep(lattice: LatticeSpec, widths: Optional[Iterable[int]] = None):
    """Strip masks for l_A = 1 .. L-1 (or the given widths)."""
    widths = range(1, lattice.size) if widths is None else widths
    return [make_mask(lattice, "strip", width=w) for w in widths]
