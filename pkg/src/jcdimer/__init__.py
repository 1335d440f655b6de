"""
jcdimer: two Jaynes-Cummings cavities with Kerr nonlinearity, coupled by
photon hopping.

Submodules
----------
core           parameters, states, steady-state records, time series
semiclassical  classical flow, steady states, linear stability
scans          continuation, phase diagrams, transition locators
quantum        truncated Fock basis, Hamiltonian, propagation, reductions
observables    imbalances, correlators, phase statistics, entropies, fits
phasespace     Husimi and Wigner functions, cat-state references
experiments    run recipes shared by the command line and the demos
io             text tables with JSON metadata headers
cli            command-line driver
"""

__version__ = "0.1.0"

from .core import (BranchLabel, FixedPoint, ModelParams, SemiclassicalState, TimeSeries,
                   classical_energy, constraint_residual)
from .errors import JCDimerError

__all__ = [
    "__version__",
    "BranchLabel",
    "FixedPoint",
    "ModelParams",
    "SemiclassicalState",
    "TimeSeries",
    "classical_energy",
    "constraint_residual",
    "JCDimerError",
]
