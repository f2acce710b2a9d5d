import logging

import numpy as np
import pytest
from scipy.linalg import expm

from entspec.dynamics import (
    EntropyObserver, EvolutionConfig, OccupationObserver, Propagator, SpectrumObserver, TrajectoryEngine,
    TrajectoryState, init_state, measurement_weights, orthonormalize, run_trajectory, step, trajectory_rng,
)
from entspec.exceptions import TrajectoryError
from entspec.geometry import build_lattice, make_mask


def test_propagator_is_unitary(square):
    _, hopping = square
    propagator = Propagator.from_hopping(hopping, 0.05)
    assert propagator.unitarity_error() < 1e-12
    assert np.allclose(propagator.matrix, expm(-1j * hopping * 0.05), atol=1e-12)


def test_random_initial_state_is_orthonormal(random_square_state):
    assert random_square_state.orthonormality_error() < 1e-12
    assert random_square_state.n_particles == random_square_state.n_sites // 2


def test_neel_state_in_one_dimension():
    lattice, _ = build_lattice(1, 4)
    state = init_state(lattice, "neel", np.random.default_rng(0))
    assert np.allclose(state.occupations(), [1, 0, 1, 0])


def test_neel_state_in_two_dimensions(square):
    lattice, _ = square
    state = init_state(lattice, "neel", np.random.default_rng(0))
    x, y = lattice.coordinates().T
    assert np.allclose(state.occupations(), (1 + (-1.0) ** (x + y)) / 2)


def test_unknown_initial_state(square):
    lattice, _ = square
    with pytest.raises(ValueError):
        init_state(lattice, "ferromagnet", np.random.default_rng(0))
    with pytest.raises(ValueError):
        EvolutionConfig(gamma=1.0, initial_state="ferromagnet")


def test_weights_without_monitoring_are_one(random_square_state):
    assert np.array_equal(measurement_weights(random_square_state, 0.0, 0.05), np.ones(16))


def test_weights_are_rescaled_and_positive(random_square_state):
    w = measurement_weights(random_square_state, 2.0, 0.05)
    assert np.all(w > 0)
    assert w.max() == pytest.approx(1.0)


def test_negative_rate_is_rejected(random_square_state):
    with pytest.raises(ValueError):
        measurement_weights(random_square_state, -0.1, 0.05)


def test_step_matches_two_site_kraus_update():
    """One particle on two sites: the many-body state is the orbital itself."""
    gamma, dt = 1.3, 0.05
    lattice, hopping = build_lattice(1, 2)
    psi0 = np.array([[0.6], [0.8j]])
    state = TrajectoryState(psi=psi0.copy(), rng=np.random.default_rng(5))
    config = EvolutionConfig(gamma=gamma, dt=dt)
    step(state, config, Propagator.from_hopping(hopping, dt))

    xi = np.random.default_rng(5).standard_normal(2)
    n = np.abs(psi0[:, 0]) ** 2
    current = n + xi / np.sqrt(2 * gamma * dt)
    # projector exp[gamma dt (2 J - 1) n] acting on single-occupation states
    kraus = np.diag(np.exp(gamma * dt * (2 * current - 1)))
    expected = kraus @ expm(-1j * hopping * dt) @ psi0[:, 0]
    expected /= np.linalg.norm(expected)

    assert abs(np.vdot(expected, state.psi[:, 0])) == pytest.approx(1.0, abs=1e-12)
    assert state.time == pytest.approx(dt)


def test_unmonitored_evolution_is_unitary_conjugation(random_square_state, square):
    _, hopping = square
    config = EvolutionConfig(gamma=0.0, dt=0.05)
    propagator = Propagator.from_hopping(hopping, config.dt)
    g0 = random_square_state.correlation()
    for _ in range(40):
        step(random_square_state, config, propagator)
    u = expm(-1j * hopping * 40 * config.dt)
    g = random_square_state.correlation()
    assert np.allclose(g, u @ g0 @ u.conj().T, atol=1e-10)
    assert np.allclose(np.linalg.eigvalsh(g), np.repeat([0.0, 1.0], 8), atol=1e-10)


def test_orthonormality_is_kept_under_monitoring(random_square_state, square):
    _, hopping = square
    config = EvolutionConfig(gamma=2.0, dt=0.02, check_orthonormality=True)
    propagator = Propagator.from_hopping(hopping, config.dt)
    for _ in range(200):
        step(random_square_state, config, propagator)
    assert random_square_state.orthonormality_error() < 1e-10


def test_strong_monitoring_polarizes_occupations(chain):
    lattice, hopping = chain
    config = EvolutionConfig(gamma=10.0, dt=0.01)
    propagator = Propagator.from_hopping(hopping, config.dt)
    state = init_state(lattice, "random_gaussian", trajectory_rng(3, 0))
    spread = []
    for i in range(2000):
        step(state, config, propagator)
        if i >= 1500:
            n = state.occupations()
            spread.append(np.mean(n * (1 - n)))
    assert np.mean(spread) < 0.08


def test_rank_deficient_matrix_is_rejected():
    with pytest.raises(TrajectoryError):
        orthonormalize(np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_trajectory_is_deterministic_per_id(square):
    lattice, hopping = square
    config = EvolutionConfig(gamma=1.0, burn_in=1.0, samples=2, sample_interval=0.5)
    observers = [OccupationObserver("n")]
    a = run_trajectory(lattice, hopping, config, observers, trajectory_id=3, master_seed=9)
    b = run_trajectory(lattice, hopping, config, observers, trajectory_id=3, master_seed=9)
    c = run_trajectory(lattice, hopping, config, observers, trajectory_id=4, master_seed=9)
    assert all(np.array_equal(x.observations["n"], y.observations["n"]) for x, y in zip(a, b))
    assert not np.allclose(a[0].observations["n"], c[0].observations["n"])


def test_snapshot_schedule(square):
    lattice, hopping = square
    config = EvolutionConfig(gamma=0.5, burn_in=1.0, samples=3, sample_interval=0.5)
    snapshots = TrajectoryEngine(lattice, hopping, config).run_trajectory(0, 1)
    assert [s.time for s in snapshots] == pytest.approx([1.0, 1.5, 2.0])
    assert all(s.gamma == 0.5 and s.seed == 1 and s.trajectory_id == 0 for s in snapshots)


def test_zero_burn_in_records_initial_state(square):
    lattice, hopping = square
    config = EvolutionConfig(gamma=0.5, burn_in=0.0, samples=1, initial_state="neel")
    mask = make_mask(lattice, "half_cut")
    (snapshot,) = run_trajectory(lattice, hopping, config, [EntropyObserver("s", [mask])])
    assert snapshot.time == 0.0
    assert snapshot.observations["s"][0] == pytest.approx(0.0, abs=1e-12)


def test_zero_samples_gives_no_records(square):
    lattice, hopping = square
    config = EvolutionConfig(gamma=1.0, samples=0)
    assert run_trajectory(lattice, hopping, config) == []


def test_default_burn_in_is_four_sizes(square):
    lattice, _ = square
    config = EvolutionConfig(gamma=1.0, dt=0.05)
    assert config.burn_in_time(lattice) == 16.0
    assert config.burn_in_steps(lattice) == 320


def test_coarse_step_warns(caplog):
    with caplog.at_level(logging.WARNING):
        EvolutionConfig(gamma=10.0, dt=0.05)
    assert "gamma*dt" in caplog.text


def test_spectrum_observer_stores_weights_only(random_square_state, square):
    lattice, _ = square
    observer = SpectrumObserver("spec", make_mask(lattice, "half_cut"), keep_eigenvectors=True, metadata={"L": 4})
    spectrum = observer.observe(random_square_state)
    assert spectrum.eigenvectors is None
    assert spectrum.weights.shape == (8, 8)
    assert np.allclose(spectrum.weights.sum(axis=0), 1.0)
    assert spectrum.metadata["geometry"] == "half_cut"
