import numpy as np
import pytest

from entspec.dynamics import init_state
from entspec.dynamics.trajectory import trajectory_rng
from entspec.exceptions import SpectrumError
from entspec.geometry import build_lattice, make_mask
from entspec.observables import (
    ObservableSeries, check_stationarity, clamp_occupations, correlation_matrix, density_curve_from_entropies,
    entanglement_density_curve, entanglement_entropy, entropy_from_eigenvalues, fock_entropy,
    mutual_information, standard_error, time_series, von_neumann_entropy,
)


@pytest.mark.parametrize("geometry,params", [
    ("half_cut", {}),
    ("strip", {"width": 3, "offset": 2}),
    ("checkerboard", {}),
    ("custom", {"sites": [0, 3, 5]}),
])
def test_entropy_matches_fock_space(chain, random_chain_state, geometry, params):
    lattice, _ = chain
    mask = make_mask(lattice, geometry, **params)
    assert entanglement_entropy(random_chain_state, mask) == pytest.approx(
        fock_entropy(random_chain_state.psi, mask), abs=1e-10)


@pytest.mark.parametrize("d,size", [(1, 8), (2, 4)])
@pytest.mark.parametrize("seed", range(50))
def test_random_states_match_fock_space(d, size, seed):
    lattice, _ = build_lattice(d, size)
    state = init_state(lattice, "random_gaussian", trajectory_rng(seed, 0))
    for geometry in ("half_cut", "checkerboard"):
        mask = make_mask(lattice, geometry)
        assert entanglement_entropy(state, mask) == pytest.approx(fock_entropy(state.psi, mask), abs=1e-8)


def test_pure_state_entropy_is_symmetric(square, random_square_state):
    lattice, _ = square
    mask = make_mask(lattice, "strip", width=1)
    assert entanglement_entropy(random_square_state, mask) == pytest.approx(
        entanglement_entropy(random_square_state, mask.complement(lattice)), abs=1e-10)


def test_product_state_has_no_entanglement(square):
    lattice, _ = square
    state = init_state(lattice, "neel", np.random.default_rng(0))
    for geometry in ("half_cut", "checkerboard"):
        assert entanglement_entropy(state, make_mask(lattice, geometry)) == pytest.approx(0.0, abs=1e-12)


def test_entropy_from_eigenvalues():
    assert entropy_from_eigenvalues([0.5]) == pytest.approx(np.log(2))
    assert entropy_from_eigenvalues([0.0, 1.0]) == 0.0
    assert von_neumann_entropy(np.array([0.5, 0.5])) == pytest.approx(2 * np.log(2))
    assert von_neumann_entropy(np.diag([0.5, 1.0])) == pytest.approx(np.log(2))


def test_correlation_matrix_is_hermitian(square, random_square_state):
    lattice, _ = square
    g = correlation_matrix(random_square_state, make_mask(lattice, "half_cut"))
    assert np.allclose(g.matrix, g.matrix.conj().T)
    assert np.all((g.eigenvalues >= 0) & (g.eigenvalues <= 1))
    assert g.particle_number == pytest.approx(random_square_state.occupations()[g.sites].sum())


def test_empty_mask_is_rejected(random_square_state):
    with pytest.raises(ValueError):
        correlation_matrix(random_square_state, np.array([], dtype=int))


def test_unphysical_eigenvalues_raise():
    with pytest.raises(SpectrumError):
        clamp_occupations(np.array([0.2, 1.1]))
    assert np.array_equal(clamp_occupations(np.array([-1e-12, 1 + 1e-12])), [0.0, 1.0])


def test_mutual_information(chain, random_chain_state):
    lattice, _ = chain
    a = make_mask(lattice, "strip", width=1)
    b = make_mask(lattice, "strip", width=1, offset=4)
    info = mutual_information(random_chain_state, a, b)
    union = np.union1d(a.sites, b.sites)
    expected = (fock_entropy(random_chain_state.psi, a) + fock_entropy(random_chain_state.psi, b)
                - fock_entropy(random_chain_state.psi, union))
    assert info >= 0
    assert info == pytest.approx(max(expected, 0.0), abs=1e-10)
    with pytest.raises(ValueError):
        mutual_information(random_chain_state, a, make_mask(lattice, "half_cut"))


def test_density_curve_of_a_pure_state_is_mirror_symmetric(square, random_square_state):
    lattice, _ = square
    curve = entanglement_density_curve([random_square_state], lattice)
    assert np.array_equal(curve.x, [1, 2, 3])
    assert curve.mean[0] == pytest.approx(curve.mean[2], abs=1e-10)
    assert curve.metadata["L"] == 4


def test_density_curve_from_entropies_and_offset():
    entropies = np.array([[1.0, 2.0, 1.0], [3.0, 4.0, 3.0]])
    curve = density_curve_from_entropies(entropies, [1, 2, 3], size=4)
    assert np.allclose(curve.mean, [0.5, 0.75, 0.5])
    assert np.allclose(curve.stderr, [0.25, 0.25, 0.25])
    assert np.array_equal(curve.count, [2, 2, 2])
    shifted = density_curve_from_entropies(entropies, [1, 2, 3], size=4, offset=True)
    assert np.allclose(shifted.mean, [-0.25, 0.0, -0.25])


def test_standard_error_needs_two_samples():
    err = standard_error(np.array([[1.0, np.nan], [3.0, 2.0]]))
    assert err[0] == pytest.approx(1.0)
    assert np.isnan(err[1])


def test_time_series_divides_by_size():
    series = time_series([0.0, 1.0], np.array([[0.0, 2.0], [0.0, 4.0]]), size=2)
    assert series.abscissa == "t"
    assert np.allclose(series.mean, [0.0, 1.5])


def test_stationarity_check():
    rng = np.random.default_rng(0)
    flat = rng.normal(1.0, 0.1, size=(50, 1)) + np.zeros((50, 10))
    assert check_stationarity(flat) == (True, 0.0)
    drifting = flat + np.linspace(0, 5, 10)
    stationary, z = check_stationarity(drifting)
    assert not stationary and z > 2


def test_series_csv_keeps_header(tmp_path):
    series = ObservableSeries.from_samples("gamma", [1.0, 2.0], np.array([[0.4, 0.5], [0.6, 0.7]]),
                                           {"L": 8, "observable": "r_tilde"})
    path = tmp_path / "series.csv"
    series.to_csv(str(path))
    restored = ObservableSeries.read_csv(str(path))
    assert restored.abscissa == "gamma"
    assert restored.metadata["L"] == "8"
    assert np.allclose(restored.mean, series.mean)
    with pytest.raises(ValueError):
        ObservableSeries("volume", [1.0], [1.0], [0.1], [1])


def test_fock_oracle_is_limited_to_small_lattices():
    with pytest.raises(ValueError):
        fock_entropy(np.zeros((18, 9)), np.arange(4))
