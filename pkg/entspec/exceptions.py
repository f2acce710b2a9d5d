"""
Exception hierarchy for entspec.
The CLI maps these onto process exit codes.
"""


class EntspecError(Exception):
    """Base class for all entspec errors."""


class ConfigError(EntspecError, ValueError):
    """Invalid run configuration or parameter combination."""


class TrajectoryError(EntspecError, RuntimeError):
    """A trajectory could not be continued (e.g. rank-deficient QR)."""


class SpectrumError(EntspecError, ValueError):
    """Correlation eigenvalues left the physical interval [0, 1]."""


class CollapseError(EntspecError, ValueError):
    """Finite-size scaling input cannot be collapsed."""


class IncompleteDataError(EntspecError):
    """Persisted ensemble is missing trajectories or fails checksum verification."""


EXIT_SUCCESS = 0
EXIT_CONFIG_ERROR = 1
EXIT_RUNTIME_FAILURE = 2
EXIT_INCOMPLETE_DATA = 3
