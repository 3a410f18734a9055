"""Dissipative dynamics of small spin-1/2 lattices under a thermal Lindblad bath.

Modules
-------
lattice
    Lattice geometry, pair classes, field layouts and automorphisms.
spin_ops
    Model parameters, many-body spin operators, Hamiltonian and jump operators.
liouville
    Vectorization and the Lindblad superoperator.
evolve
    Trajectories, spectral expansion and steady states.
observables
    Initial states, concurrence, tau2 and magnetization.
runner
    Run configuration, sweeps, output and the oracle suite.
"""

__version__ = "0.1.0"

from .evolve import EvolutionGrid, integrate, iter_states, spectral_solve, steady_state
from .lattice import LatticeSpec, assign_fields, build_lattice, build_triangular7
from .liouville import Superoperator, build_liouvillian
from .observables import concurrence, initial_state, observable_record, partial_trace
from .spin_ops import ModelParams, build_hamiltonian, build_lindblad_ops

__all__ = [
    "__version__",
    "EvolutionGrid",
    "integrate",
    "iter_states",
    "spectral_solve",
    "steady_state",
    "LatticeSpec",
    "assign_fields",
    "build_lattice",
    "build_triangular7",
    "Superoperator",
    "build_liouvillian",
    "concurrence",
    "initial_state",
    "observable_record",
    "partial_trace",
    "ModelParams",
    "build_hamiltonian",
    "build_lindblad_ops",
]
