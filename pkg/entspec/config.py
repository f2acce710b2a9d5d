"""
Configuration module for entspec.
Centralizes numerical defaults and the single environment override (output root).
"""
import os
from typing import Dict, Any

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load environment variables
load_dotenv()


class Settings(BaseSettings):
    """Environment settings. Only the output root can be overridden."""

    output_root: str = "output"

    model_config = SettingsConfigDict(env_prefix="ENTSPEC_", env_file=".env", extra="ignore")


class Config:
    """Numerical defaults for entspec."""

    # Trajectory engine
    DT = 0.05
    BURN_IN_FACTOR = 4.0  # T_burn = BURN_IN_FACTOR * L
    GAMMA_DT_WARNING = 0.1
    ORTHONORMALITY_TOL = 1e-10

    # Gaussian observables
    EIGENVALUE_CLAMP = 1e-10

    # Entanglement spectrum
    SATURATION_CLAMP = 1e-12
    DOS_BINS = 201
    DOS_RANGE = (-15.0, 15.0)

    # RMT diagnostics
    DEGENERATE_SPACING = 1e-13
    KL_FLOOR = 1e-300
    SFF_ETA = 0.5
    THOULESS_TOLERANCE = 0.05
    THOULESS_SMOOTHING = 0.1
    THOULESS_NOISE_SIGMAS = 4.0
    R_HIST_BINS = 50
    R_HIST_MAX = 5.0

    # Scaling collapse
    COLLAPSE_GAMMA_POINTS = 41
    COLLAPSE_NU_RANGE = (0.3, 3.0)
    COLLAPSE_NU_POINTS = 41
    COLLAPSE_A_RANGE = (-0.5, 0.5)
    COLLAPSE_A_POINTS = 11
    COLLAPSE_WINDOW = 6.0
    COLLAPSE_CONTOUR = 4.0

    @classmethod
    def get_all(cls) -> Dict[str, Any]:
        """Get all configuration values as a dictionary."""
        return {
            key: value for key, value in cls.__dict__.items()
            if not key.startswith('_') and key.isupper()
        }

    @classmethod
    def get_evolution_config(cls) -> Dict[str, Any]:
        """Get defaults for the trajectory engine."""
        return {
            "dt": cls.DT,
            "burn_in_factor": cls.BURN_IN_FACTOR,
            "orthonormality_tol": cls.ORTHONORMALITY_TOL,
        }

    @classmethod
    def get_spectrum_config(cls) -> Dict[str, Any]:
        """Get defaults for entanglement spectra and their statistics."""
        return {
            "saturation_clamp": cls.SATURATION_CLAMP,
            "dos_bins": cls.DOS_BINS,
            "dos_range": cls.DOS_RANGE,
            "eta": cls.SFF_ETA,
            "thouless_tolerance": cls.THOULESS_TOLERANCE,
            "thouless_smoothing": cls.THOULESS_SMOOTHING,
            "thouless_noise_sigmas": cls.THOULESS_NOISE_SIGMAS,
        }

    @classmethod
    def get_collapse_config(cls) -> Dict[str, Any]:
        """Get defaults for the scaling-collapse minimizer."""
        return {
            "gamma_points": cls.COLLAPSE_GAMMA_POINTS,
            "nu_range": cls.COLLAPSE_NU_RANGE,
            "nu_points": cls.COLLAPSE_NU_POINTS,
            "a_range": cls.COLLAPSE_A_RANGE,
            "a_points": cls.COLLAPSE_A_POINTS,
            "window": None,
            "contour": cls.COLLAPSE_CONTOUR,
            "n_jobs": 1,
        }


def get_settings() -> Settings:
    """Read settings fresh from the environment."""
    return Settings()


def resolve_output_dir(directory: str) -> str:
    """Resolve a run directory against the output root unless it is absolute."""
    if os.path.isabs(directory):
        return directory
    return os.path.join(get_settings().output_root, directory)


# Create a global instance for easy imports
config = Config()
