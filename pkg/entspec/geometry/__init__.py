"""Hypercubic lattices, hopping matrices and subsystem masks."""
from .lattice import LatticeSpec, build_lattice, hopping_spectrum
from .masks import SubsystemMask, make_mask, mask_from_descriptor, parse_geometry, strip_sweep, GEOMETRIES

__all__ = [
    "LatticeSpec", "build_lattice", "hopping_spectrum",
    "SubsystemMask", "make_mask", "mask_from_descriptor", "parse_geometry", "strip_sweep", "GEOMETRIES",
]
