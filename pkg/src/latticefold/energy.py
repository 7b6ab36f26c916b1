"""Turn-space conformational energy: the classical oracle for every solver."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .model import ContactEnergyTable, Conformation, ProteinSequence, positions_from_turns

Mode = Literal["physical", "clamped"]

DEFAULT_OVERLAP_PENALTY = 50.0
DEFAULT_BACKTURN_PENALTY = 50.0
CONTACT_DIST2 = 3
MIN_CONTACT_SEPARATION = 5


@dataclass(frozen=True)
class Penalties:
    overlap: float = DEFAULT_OVERLAP_PENALTY
    backturn: float = DEFAULT_BACKTURN_PENALTY


@dataclass(frozen=True)
class ContactPair:
    i: int
    j: int
    e_ij: float


@dataclass(frozen=True)
class EnergyBreakdown:
    contact_energy: float
    overlap_count: int
    backturn_count: int
    total: float

    @property
    def valid(self) -> bool:
        return self.overlap_count == 0 and self.backturn_count == 0


def candidate_pairs(n_residues: int) -> list[tuple[int, int]]:
    """1-based (i, j) with odd separation >= 5: the only pairs that can touch."""
    return [
        (i, j)
        for i in range(1, n_residues + 1)
        for j in range(i + MIN_CONTACT_SEPARATION, n_residues + 1, 2)
    ]


def contact_pairs(seq: ProteinSequence, table: ContactEnergyTable) -> list[ContactPair]:
    codes = seq.codes
    return [
        ContactPair(i, j, table(codes[i - 1], codes[j - 1]))
        for i, j in candidate_pairs(len(seq))
    ]


def overlap_pairs(n_residues: int) -> list[tuple[int, int]]:
    # Separation 2 coincides only on a back-turn, which is counted separately.
    return [
        (i, j) for i in range(1, n_residues + 1) for j in range(i + 4, n_residues + 1, 2)
    ]


def _pair_arrays(pairs):
    if not pairs:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    a = np.array(pairs, dtype=np.int64) - 1
    return a[:, 0], a[:, 1]


class EnergyModel:
    """Precomputed pair tables for repeated scoring of one sequence."""

    def __init__(
        self,
        seq: ProteinSequence,
        table: ContactEnergyTable,
        mode: Mode = "physical",
        penalties: Penalties = Penalties(),
    ):
        if mode not in ("physical", "clamped"):
            raise ValueError(f"unknown energy mode {mode!r}")
        self.seq = seq
        self.mode = mode
        self.penalties = penalties
        n = len(seq)
        self.ci, self.cj = _pair_arrays(candidate_pairs(n))
        e = table.pair_matrix(seq)[self.ci, self.cj]
        self.pair_e = np.minimum(e, 0.0) if mode == "clamped" else e
        self.oi, self.oj = _pair_arrays(overlap_pairs(n))

    def batch(self, turns: np.ndarray) -> dict[str, np.ndarray]:
        turns = np.atleast_2d(np.asarray(turns, dtype=np.int64))
        pos = positions_from_turns(turns)
        d2 = ((pos[:, self.cj] - pos[:, self.ci]) ** 2).sum(axis=-1)
        contact = ((d2 == CONTACT_DIST2) * self.pair_e).sum(axis=-1)
        overlaps = (pos[:, self.oi] == pos[:, self.oj]).all(axis=-1).sum(axis=-1)
        backturns = (turns[:, 1:] == turns[:, :-1]).sum(axis=-1)
        total = (
            contact
            + self.penalties.overlap * overlaps
            + self.penalties.backturn * backturns
        )
        return {
            "contact_energy": contact.astype(float),
            "overlap_count": overlaps.astype(np.int64),
            "backturn_count": backturns.astype(np.int64),
            "total": total.astype(float),
        }

    def total(self, turns) -> float:
        return float(self.batch(np.asarray(turns)[None, :])["total"][0])


def evaluate_batch(
    turns: np.ndarray,
    seq: ProteinSequence,
    table: ContactEnergyTable,
    mode: Mode = "physical",
    penalties: Penalties = Penalties(),
) -> dict[str, np.ndarray]:
    """Vectorized ``evaluate`` over a (M, N-1) array of turn vectors."""
    return EnergyModel(seq, table, mode, penalties).batch(turns)


def evaluate(
    conf: Conformation,
    table: ContactEnergyTable,
    mode: Mode = "physical",
    penalties: Penalties = Penalties(),
) -> EnergyBreakdown:
    """Energy of one conformation.

    ``physical`` sums the raw table entries of realized contacts; ``clamped``
    uses min(e_ij, 0), which is what the Hamiltonian's interaction ancillas
    can reproduce.  Invalid conformations are scored, not rejected.
    """
    r = evaluate_batch(np.array([conf.turns]), conf.sequence, table, mode, penalties)
    return EnergyBreakdown(
        contact_energy=float(r["contact_energy"][0]),
        overlap_count=int(r["overlap_count"][0]),
        backturn_count=int(r["backturn_count"][0]),
        total=float(r["total"][0]),
    )


def realized_contacts(conf: Conformation, table: ContactEnergyTable) -> list[ContactPair]:
    pos = positions_from_turns(np.array(conf.turns))
    out = []
    for cp in contact_pairs(conf.sequence, table):
        if int(((pos[cp.j - 1] - pos[cp.i - 1]) ** 2).sum()) == CONTACT_DIST2:
            out.append(cp)
    return out
