"""Quantum Davidson eigensolver on a statevector simulator.

Pauli algebra, model Hamiltonians, a Jordan-Wigner mapping of FCIDUMP
integrals, Krylov-subspace drivers (QDavidson, QLanczos and a classical
Davidson reference) and a config-driven runner.
"""
from .algorithms import (ClassicalResult, IterationRecord, QDavidsonConfig, RunResult,
                         run_classical_davidson, run_qdavidson, run_qlanczos)
from .fermion import (ExcitationPool, FCIDumpError, FermionHamiltonian, build_excitation_pool,
                      build_qubit_hamiltonian, parse_fcidump, read_fcidump)
from .mapping import DepthModel, MappingResult, apply_mapping, depth_of, map_correction, odd_y_pool
from .measurement import MatrixElementEstimator, ShotBudget, estimate_pauli_element, estimate_shot_budget
from .models import HeisenbergSpec, build_heisenberg, neel_bitstring
from .pauli import PauliSum, PauliWord, QubitCountError, to_dense
from .statevector import StateVector, exact_diagonalize, from_bitstring
from .subspace import KrylovBasis, SubspaceError, SubspaceProblem, assemble, solve

__version__ = "0.1.0"

__all__ = [
    "ClassicalResult", "DepthModel", "ExcitationPool", "FCIDumpError", "FermionHamiltonian",
    "HeisenbergSpec", "IterationRecord", "KrylovBasis", "MappingResult", "MatrixElementEstimator",
    "PauliSum", "PauliWord", "QDavidsonConfig", "QubitCountError", "RunResult", "ShotBudget",
    "StateVector", "SubspaceError", "SubspaceProblem", "apply_mapping", "assemble",
    "build_excitation_pool", "build_heisenberg", "build_qubit_hamiltonian", "depth_of",
    "estimate_pauli_element", "estimate_shot_budget", "exact_diagonalize", "from_bitstring",
    "map_correction", "neel_bitstring", "odd_y_pool", "parse_fcidump", "read_fcidump",
    "run_classical_davidson", "run_qdavidson", "run_qlanczos", "solve", "to_dense",
]
