"""Diagonal folding Hamiltonian over configuration bits and interaction ancillas.

H = lam_bt * sum_k EQ(t_k, t_{k+1})
    + sum_{(i,j)} q_ij * (e_ij + lam_1 * (D2_ij - 3))

EQ is the two-bit equality indicator of consecutive turns and D2_ij the
squared lattice displacement between beads i and j written as a polynomial in
the configuration bits.  For odd separations D2 is 3 (contact) or at least 11,
so with lam_1 > max|e|/8 the minimizing ancilla is q_ij = [contact and e_ij < 0].
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .energy import DEFAULT_BACKTURN_PENALTY, candidate_pairs
from .model import (
    ContactEnergyTable,
    ProteinSequence,
    bit_labels,
    bond_signs,
    fixed_bit_value,
    n_free_bits,
    turn_bit_slots,
)
from .polynomial import PseudoBooleanPoly, SpinPoly, to_spin

DEFAULT_CONTACT_PENALTY = 10.0

P = PseudoBooleanPoly


@dataclass(frozen=True)
class VariableLayout:
    n_residues: int
    config_labels: tuple[str, ...]
    pairs: tuple[tuple[int, int], ...]

    @property
    def n_config(self) -> int:
        return len(self.config_labels)

    @property
    def n_ancilla(self) -> int:
        return len(self.pairs)

    @property
    def size(self) -> int:
        return self.n_config + self.n_ancilla

    @property
    def labels(self) -> list[str]:
        return list(self.config_labels) + [f"q{i}_{j}" for i, j in self.pairs]

    def ancilla_index(self, pair: tuple[int, int]) -> int:
        return self.n_config + self.pairs.index(pair)

    @classmethod
    def for_length(cls, n_residues: int) -> VariableLayout:
        n_free_bits(n_residues)
        return cls(n_residues, tuple(bit_labels(n_residues)), tuple(candidate_pairs(n_residues)))


@dataclass(frozen=True)
class FoldingHamiltonian:
    poly: PseudoBooleanPoly
    layout: VariableLayout
    sequence: ProteinSequence
    backturn_penalty: float
    contact_penalty: float
    pair_energies: tuple[float, ...] = field(default=())

    def spin(self) -> SpinPoly:
        return to_spin(self.poly)

    def metadata(self) -> dict:
        spin = self.spin()
        return {
            "N": self.layout.n_residues,
            "sequence": self.sequence.codes,
            "layout": self.layout.labels,
            "n_config": self.layout.n_config,
            "n_ancilla": self.layout.n_ancilla,
            "n_variables": self.layout.size,
            "lambda_backturn": self.backturn_penalty,
            "lambda_contact": self.contact_penalty,
            "degree": self.poly.degree,
            "boolean_terms": self.poly.num_terms,
            "T": spin.T,
            "h_max": spin.h_max,
        }

    def metadata_json(self) -> str:
        return json.dumps(self.metadata(), indent=2)

    def resolve_ancillas(self, config_bits) -> np.ndarray:
        """Full assignment with each ancilla set to its per-pair minimizer."""
        config_bits = np.asarray(config_bits, dtype=np.int64)
        assignment = np.concatenate([config_bits, np.zeros(self.layout.n_ancilla, np.int64)])
        # every ancilla appears linearly and alone, so pairs decouple
        for k in range(self.layout.n_ancilla):
            idx = self.layout.n_config + k
            slope = _ancilla_slope(self.poly, idx, assignment)
            assignment[idx] = 1 if slope < 0 else 0
        return assignment


def _ancilla_slope(poly: PseudoBooleanPoly, idx: int, assignment: np.ndarray) -> float:
    s = 0.0
    for m, c in poly.terms.items():
        if idx in m and all(assignment[v] for v in m if v != idx):
            s += c
    return s


def _bit(k: int, which: str, slots) -> PseudoBooleanPoly:
    a_idx, b_idx = slots[k - 1]
    idx = a_idx if which == "a" else b_idx
    if idx is None:
        return P.const(fixed_bit_value(k, which))
    return P.var(idx)


def direction_components(k: int, slots) -> tuple[PseudoBooleanPoly, ...]:
    """(s, u, s*u) of bond k's direction as polynomials in the free bits."""
    one = P.const(1.0)
    s = one - _bit(k, "a", slots).scale(2.0)
    u = one - _bit(k, "b", slots).scale(2.0)
    return s, u, s * u


def _eq(x: PseudoBooleanPoly, y: PseudoBooleanPoly) -> PseudoBooleanPoly:
    return P.const(1.0) - x - y + (x * y).scale(2.0)


def backturn_poly(n_residues: int) -> PseudoBooleanPoly:
    """Number of k with t_k == t_{k+1}."""
    slots = turn_bit_slots(n_residues)
    total = P()
    for k in range(1, n_residues - 1):
        total = total + _eq(_bit(k, "a", slots), _bit(k + 1, "a", slots)) * _eq(
            _bit(k, "b", slots), _bit(k + 1, "b", slots)
        )
    return total


def displacement_sq_poly(i: int, j: int, n_residues: int, comps=None) -> PseudoBooleanPoly:
    """|p_j - p_i|^2 as a polynomial in the free bits (1-based beads)."""
    slots = turn_bit_slots(n_residues)
    if comps is None:
        comps = {k: direction_components(k, slots) for k in range(1, n_residues)}
    sign = bond_signs(n_residues - 1)
    d2 = P()
    for axis in range(3):
        coord = P()
        for k in range(i, j):
            coord = coord + comps[k][axis].scale(float(sign[k - 1]))
        d2 = d2 + coord * coord
    return d2


def build_hamiltonian(
    seq: ProteinSequence,
    table: ContactEnergyTable,
    backturn_penalty: float = DEFAULT_BACKTURN_PENALTY,
    contact_penalty: float = DEFAULT_CONTACT_PENALTY,
) -> FoldingHamiltonian:
    n = len(seq)
    if n < 4:
        raise ValueError(f"N ≥ 4 required to build a Hamiltonian (got N={n})")
    layout = VariableLayout.for_length(n)
    slots = turn_bit_slots(n)
    comps = {k: direction_components(k, slots) for k in range(1, n)}

    h = backturn_poly(n).scale(backturn_penalty)
    codes = seq.codes
    energies = []
    for (i, j) in layout.pairs:
        e_ij = table(codes[i - 1], codes[j - 1])
        energies.append(e_ij)
        d2 = displacement_sq_poly(i, j, n, comps)
        bracket = P.const(e_ij) + (d2 - P.const(3.0)).scale(contact_penalty)
        h = h + P.var(layout.ancilla_index((i, j))) * bracket
    return FoldingHamiltonian(h, layout, seq, backturn_penalty, contact_penalty, tuple(energies))
