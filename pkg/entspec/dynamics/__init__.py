"""Monitored free-fermion trajectory engine."""
from .propagator import Propagator
from .trajectory import (
    EvolutionConfig, TrajectoryState, Snapshot, TrajectoryEngine, INITIAL_STATES,
    init_state, measurement_weights, step, run_trajectory, trajectory_rng, orthonormalize,
)
from .observers import (
    Observer, EntropyObserver, SpectrumObserver, MutualInformationObserver, OccupationObserver,
)

__all__ = [
    "Propagator", "EvolutionConfig", "TrajectoryState", "Snapshot", "TrajectoryEngine",
    "INITIAL_STATES", "init_state", "measurement_weights", "step", "run_trajectory",
    "trajectory_rng", "orthonormalize", "Observer", "EntropyObserver", "SpectrumObserver",
    "MutualInformationObserver", "OccupationObserver",
]
