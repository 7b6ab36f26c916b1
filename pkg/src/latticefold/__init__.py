"""Coarse-grained lattice protein folding with Ising/QUBO Hamiltonians."""

__version__ = "0.1.0"

from .energy import Penalties, candidate_pairs, evaluate
from .hamiltonian import build_hamiltonian
from .model import (
    Conformation,
    ProteinSequence,
    decode_positions,
    from_bits,
    load_contact_table,
    parse_sequence,
    to_bits,
)
from .polynomial import PseudoBooleanPoly, SpinPoly, eval_poly, to_spin
from .quadratize import QuboProgram, quadratize
from .resources import levinthal, qubit_count, shots_bound
from .screener import screen
from .solvers import solve_anneal, solve_cvar_vqe, solve_exhaustive, solve_qubo_bruteforce
from .structio import radius_of_gyration, rmsd_kabsch, to_trace

__all__ = [
    "Conformation", "Penalties", "ProteinSequence", "PseudoBooleanPoly", "QuboProgram",
    "SpinPoly", "build_hamiltonian", "candidate_pairs", "decode_positions", "eval_poly",
    "evaluate", "from_bits", "levinthal", "load_contact_table", "parse_sequence",
    "quadratize", "qubit_count", "radius_of_gyration", "rmsd_kabsch", "screen",
    "shots_bound", "solve_anneal", "solve_cvar_vqe", "solve_exhaustive",
    "solve_qubo_bruteforce", "to_bits", "to_spin", "to_trace",
]
