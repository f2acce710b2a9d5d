"""
Quantum trajectories of continuously monitored free fermions.

The state is a V x N matrix psi of orthonormal single-particle orbitals. One
step applies the hopping propagator, multiplies by the stochastic measurement
weights and restores orthonormality with a QR decomposition.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence
import logging

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from ..config import Config
from ..exceptions import TrajectoryError
from ..geometry.lattice import LatticeSpec
from .propagator import Propagator

logger = logging.getLogger(__name__)

INITIAL_STATES = ("random_gaussian", "neel")


class EvolutionConfig(BaseModel):
    """Parameters of one trajectory."""

    gamma: float = Field(ge=0.0)
    dt: float = Field(default=Config.DT, gt=0.0)
    burn_in: Optional[float] = Field(default=None, ge=0.0)
    sample_interval: float = Field(default=1.0, gt=0.0)
    samples: int = Field(default=1, ge=0)
    initial_state: str = "random_gaussian"
    check_orthonormality: bool = False

    @field_validator("initial_state")
    @classmethod
    def validate_initial_state(cls, v: str) -> str:
        if v not in INITIAL_STATES:
            raise ValueError(f"Unknown initial state '{v}'. Valid: {', '.join(INITIAL_STATES)}")
        return v

    @model_validator(mode="after")
    def warn_coarse_step(self) -> "EvolutionConfig":
        if self.gamma * self.dt > Config.GAMMA_DT_WARNING:
            logger.warning(f"gamma*dt = {self.gamma * self.dt:.3f} is not small; consider a smaller dt")
        return self

    def burn_in_time(self, lattice: LatticeSpec) -> float:
        if self.burn_in is not None:
            return self.burn_in
        return Config.BURN_IN_FACTOR * lattice.size

    def burn_in_steps(self, lattice: LatticeSpec) -> int:
        return int(round(self.burn_in_time(lattice) / self.dt))

    def sample_steps(self) -> int:
        return max(1, int(round(self.sample_interval / self.dt)))


@dataclass
class TrajectoryState:
    """Wavefunction matrix, clock and RNG stream of one trajectory."""

    psi: np.ndarray
    rng: np.random.Generator
    time: float = 0.0
    trajectory_id: int = 0
    seed: Optional[int] = None

    @property
    def n_sites(self) -> int:
        return self.psi.shape[0]

    @property
    def n_particles(self) -> int:
        return self.psi.shape[1]

    def occupations(self) -> np.ndarray:
        """<n_l> = diag(psi psi^dagger)."""
        return np.einsum("ij,ij->i", self.psi, self.psi.conj()).real

    def correlation(self) -> np.ndarray:
        return self.psi @ self.psi.conj().T

    def orthonormality_error(self) -> float:
        gram = self.psi.conj().T @ self.psi
        return float(np.max(np.abs(gram - np.eye(self.n_particles))))


@dataclass
class Snapshot:
    """Observer output at one sampling time."""

    time: float
    trajectory_id: int
    gamma: float
    seed: Optional[int]
    observations: Dict[str, Any] = field(default_factory=dict)


def trajectory_rng(master_seed: int, trajectory_id: int) -> np.random.Generator:
    """Independent stream keyed by (master seed, trajectory id)."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(trajectory_id,)))


def orthonormalize(matrix: np.ndarray) -> np.ndarray:
    """Q factor of a reduced QR decomposition; rejects rank-deficient input."""
    q, r = np.linalg.qr(matrix)
    diag = np.abs(np.diag(r))
    if diag.size and (not np.all(np.isfinite(diag)) or diag.min() <= 1e-14 * max(diag.max(), 1e-300)):
        raise TrajectoryError("Rank-deficient wavefunction matrix in QR normalization")
    return q


def init_state(lattice: LatticeSpec, tag: str, rng: np.random.Generator,
               trajectory_id: int = 0, seed: Optional[int] = None) -> TrajectoryState:
    """
    Initial half-filled Gaussian state.

    Args:
        lattice: Lattice with V sites; N = V/2 particles
        tag: 'random_gaussian' (QR of a complex normal matrix) or 'neel'
        rng: Random generator of the trajectory
    """
    n_sites, n_particles = lattice.n_sites, lattice.n_particles
    if tag == "random_gaussian":
        z = rng.standard_normal((n_sites, n_particles)) + 1j * rng.standard_normal((n_sites, n_particles))
        psi = orthonormalize(z / np.sqrt(2.0))
    elif tag == "neel":
        occupied = np.flatnonzero(lattice.parity() == 0)
        psi = np.zeros((n_sites, n_particles), dtype=complex)
        psi[occupied, np.arange(n_particles)] = 1.0
    else:
        raise ValueError(f"Unknown initial state '{tag}'. Valid: {', '.join(INITIAL_STATES)}")
    return TrajectoryState(psi=psi, rng=rng, trajectory_id=trajectory_id, seed=seed)


def measurement_weights(state: TrajectoryState, gamma: float, dt: float,
                        rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """
    Diagonal weights w_l = exp[sqrt(2 gamma dt) xi_l + 2 gamma dt <n_l>], xi_l ~ N(0, 1).

    The weights are rescaled by their maximum; a site-independent factor cancels in QR.
    """
    if gamma < 0:
        raise ValueError(f"Monitoring rate must be non-negative, got {gamma}")
    if gamma == 0:
        return np.ones(state.n_sites)
    rng = state.rng if rng is None else rng
    xi = rng.standard_normal(state.n_sites)
    exponent = np.sqrt(2.0 * gamma * dt) * xi + 2.0 * gamma * dt * state.occupations()
    return np.exp(exponent - exponent.max())


def step(state: TrajectoryState, config: EvolutionConfig, propagator: Propagator) -> TrajectoryState:
    """
    Advance the state by one time step, psi <- QR(diag(w) U psi); updates in place.
    """
    weights = measurement_weights(state, config.gamma, config.dt)
    state.psi = orthonormalize(weights[:, None] * propagator.apply(state.psi))
    state.time += config.dt

    if config.check_orthonormality:
        error = state.orthonormality_error()
        if error > Config.ORTHONORMALITY_TOL:
            raise TrajectoryError(f"Orthonormality lost at t={state.time:.3f}: error {error:.3e}")
    return state


class TrajectoryEngine:
    """Runs trajectories on a fixed lattice with a shared propagator."""

    def __init__(self, lattice: LatticeSpec, hopping: np.ndarray, config: EvolutionConfig):
        """
        Initialize with configuration.

        Args:
            lattice: Lattice specification
            hopping: Hopping matrix of the lattice
            config: Evolution parameters (gamma, dt, burn-in, sampling)
        """
        self.lattice = lattice
        self.config = config
        self.propagator = Propagator.from_hopping(hopping, config.dt)
        self.logger = logging.getLogger("TrajectoryEngine")

    def run_trajectory(self, trajectory_id: int, master_seed: int,
                       observers: Sequence = ()) -> List[Snapshot]:
        """
        Evolve through the burn-in, then record observers every sampling interval.

        Returns:
            One Snapshot per sample; empty when zero samples are requested
        """
        cfg = self.config
        if cfg.samples == 0:
            return []

        rng = trajectory_rng(master_seed, trajectory_id)
        state = init_state(self.lattice, cfg.initial_state, rng, trajectory_id, master_seed)

        try:
            for _ in range(cfg.burn_in_steps(self.lattice)):
                step(state, cfg, self.propagator)

            snapshots = []
            for sample in range(cfg.samples):
                if sample:
                    for _ in range(cfg.sample_steps()):
                        step(state, cfg, self.propagator)
                snapshots.append(Snapshot(
                    time=state.time,
                    trajectory_id=trajectory_id,
                    gamma=cfg.gamma,
                    seed=master_seed,
                    observations={obs.name: obs.observe(state) for obs in observers},
                ))
        except TrajectoryError as e:
            self.logger.error(f"Trajectory {trajectory_id} at gamma={cfg.gamma} aborted: {str(e)}")
            raise

        self.logger.debug(f"Trajectory {trajectory_id} finished with {len(snapshots)} snapshots")
        return snapshots


def run_trajectory(lattice: LatticeSpec, hopping: np.ndarray, config: EvolutionConfig,
                   observers: Sequence = (), trajectory_id: int = 0,
                   master_seed: int = 0) -> List[Snapshot]:
    """Functional form of TrajectoryEngine.run_trajectory."""
    return TrajectoryEngine(lattice, hopping, config).run_trajectory(trajectory_id, master_seed, observers)
