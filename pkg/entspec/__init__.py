"""
entspec: entanglement-spectrum diagnostics of monitored free fermions.
Trajectory simulation, entanglement Hamiltonians, random-matrix statistics
and finite-size scaling collapse.
"""

__version__ = "0.1.0"
