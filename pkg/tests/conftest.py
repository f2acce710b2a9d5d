"""
Shared fixtures for the entspec test suite.
"""
import numpy as np
import pytest

from entspec.dynamics.trajectory import init_state, trajectory_rng
from entspec.geometry.lattice import build_lattice


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def chain():
    """Eight-site ring: small enough for the Fock-space oracle."""
    return build_lattice(1, 8)


@pytest.fixture
def square():
    return build_lattice(2, 4)


@pytest.fixture
def random_chain_state(chain):
    lattice, _ = chain
    return init_state(lattice, "random_gaussian", trajectory_rng(7, 0))


@pytest.fixture
def random_square_state(square):
    lattice, _ = square
    return init_state(lattice, "random_gaussian", trajectory_rng(11, 0))


@pytest.fixture
def output_root(tmp_path, monkeypatch):
    """Point the output root at a temporary directory."""
    monkeypatch.setenv("ENTSPEC_OUTPUT_ROOT", str(tmp_path))
    return tmp_path
