import numpy as np
import pytest

from entspec.geometry import (
    SubsystemMask, build_lattice, hopping_spectrum, make_mask, mask_from_descriptor, parse_geometry, strip_sweep,
)


@pytest.mark.parametrize("dimension,size", [(1, 6), (2, 4), (3, 4)])
def test_hopping_is_symmetric_with_2d_neighbours(dimension, size):
    lattice, hopping = build_lattice(dimension, size)
    assert hopping.shape == (lattice.n_sites, lattice.n_sites)
    assert np.array_equal(hopping, hopping.T)
    assert set(np.unique(hopping)) <= {-1.0, 0.0}
    assert np.all(np.count_nonzero(hopping, axis=1) == 2 * dimension)


@pytest.mark.parametrize("dimension,size", [(1, 8), (2, 4), (2, 6), (3, 4)])
def test_hopping_eigenvalues_match_band(dimension, size):
    lattice, hopping = build_lattice(dimension, size)
    assert np.allclose(np.linalg.eigvalsh(hopping), hopping_spectrum(lattice), atol=1e-12)


def test_two_site_ring_has_a_single_bond():
    lattice, hopping = build_lattice(1, 2)
    assert lattice.n_particles == 1
    assert np.array_equal(hopping, np.array([[0.0, -1.0], [-1.0, 0.0]]))


@pytest.mark.parametrize("dimension,size", [(2, 2), (3, 2), (1, 3), (2, 5), (4, 4), (0, 4), (1, 0)])
def test_invalid_lattices_are_rejected(dimension, size):
    with pytest.raises(ValueError):
        build_lattice(dimension, size)


def test_site_index_inverts_coordinates():
    lattice, _ = build_lattice(3, 4)
    coords = lattice.coordinates()
    assert np.array_equal(lattice.site_index(coords), np.arange(lattice.n_sites))
    # x is the fastest index
    assert np.array_equal(coords[1], [1, 0, 0])
    assert lattice.site_index(np.array([[4, 0, 0]]))[0] == 0


def test_half_cut_is_left_half(square):
    lattice, _ = square
    mask = make_mask(lattice, "half_cut")
    assert mask.size == lattice.n_sites // 2
    assert np.all(lattice.coordinates()[mask.sites, 0] < 2)


def test_checkerboard_has_no_internal_bonds(square):
    lattice, hopping = square
    mask = make_mask(lattice, "checkerboard")
    assert mask.size == lattice.n_sites // 2
    assert np.count_nonzero(hopping[np.ix_(mask.sites, mask.sites)]) == 0
    assert np.all(lattice.parity()[mask.sites] == 1)


def test_strip_offset_wraps():
    lattice, _ = build_lattice(1, 8)
    mask = make_mask(lattice, "strip", width=3, offset=6)
    assert np.array_equal(mask.sites, [0, 6, 7])


@pytest.mark.parametrize("width", [0, 8])
def test_strip_width_bounds(width):
    lattice, _ = build_lattice(1, 8)
    with pytest.raises(ValueError):
        make_mask(lattice, "strip", width=width)


def test_unknown_geometry_raises(square):
    lattice, _ = square
    with pytest.raises(ValueError, match="Unknown geometry"):
        make_mask(lattice, "diamond")


@pytest.mark.parametrize("mask_args", [
    ("strip", {"width": 3, "offset": 2}),
    ("half_cut", {}),
    ("checkerboard", {}),
    ("custom", {"sites": [0, 3, 5]}),
])
def test_descriptor_rebuilds_the_mask(square, mask_args):
    lattice, _ = square
    geometry, params = mask_args
    mask = make_mask(lattice, geometry, **params)
    assert mask_from_descriptor(lattice, mask.descriptor()) == mask


def test_parse_geometry_tokens(square):
    lattice, _ = square
    assert parse_geometry(lattice, "strip:1").size == 4
    assert parse_geometry(lattice, "half_cut") == make_mask(lattice, "half_cut")
    with pytest.raises(ValueError):
        parse_geometry(lattice, "strip")


def test_complement_and_sweep(square):
    lattice, _ = square
    mask = make_mask(lattice, "strip", width=1)
    rest = mask.complement(lattice)
    assert np.array_equal(np.union1d(mask.sites, rest.sites), np.arange(lattice.n_sites))
    assert [m.params["width"] for m in strip_sweep(lattice)] == [1, 2, 3]


def test_mask_sites_must_increase():
    with pytest.raises(ValueError):
        SubsystemMask(np.array([3, 1]), "custom")
    with pytest.raises(ValueError):
        SubsystemMask(np.array([], dtype=int), "custom")
