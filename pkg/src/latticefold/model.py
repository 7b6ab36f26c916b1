"""Amino-acid alphabet, contact energies and the diamond-lattice turn encoding.

A conformation of an N-residue chain is a sequence of N-1 turns, each picking
one of the four tetrahedral bond directions.  Bond k joins bead k and bead k+1
(1-based); odd bonds step along +d, even bonds along -d, which keeps every
bead angle at arccos(-1/3).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

ALPHABET = "ACDEFGHIKLMNPQRSTVWY"
AA_INDEX = {c: i for i, c in enumerate(ALPHABET)}

THREE_LETTER = {
    "A": "ALA", "C": "CYS", "D": "ASP", "E": "GLU", "F": "PHE",
    "G": "GLY", "H": "HIS", "I": "ILE", "K": "LYS", "L": "LEU",
    "M": "MET", "N": "ASN", "P": "PRO", "Q": "GLN", "R": "ARG",
    "S": "SER", "T": "THR", "V": "VAL", "W": "TRP", "Y": "TYR",
}
ONE_LETTER = {v: k for k, v in THREE_LETTER.items()}

# d_t for t = 2a + b has components (s, u, s*u) with s = 1 - 2a, u = 1 - 2b.
DIRECTIONS = np.array(
    [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=np.int64
)

# Turns 1, 2 and the high bit of turn 3 are pinned to remove rotations/mirrors.
FIXED_TURNS = (0, 2)
TETRAHEDRAL_ANGLE = float(np.degrees(np.arccos(-1.0 / 3.0)))


class SequenceError(ValueError):
    pass


@dataclass(frozen=True)
class AminoAcid:
    code: str

    def __post_init__(self):
        if self.code not in AA_INDEX:
            raise SequenceError(f"unknown amino-acid symbol {self.code!r}")

    @property
    def index(self) -> int:
        return AA_INDEX[self.code]

    @property
    def three_letter(self) -> str:
        return THREE_LETTER[self.code]


@dataclass(frozen=True)
class ProteinSequence:
    residues: tuple[AminoAcid, ...]
    name: str = ""

    def __post_init__(self):
        if len(self.residues) == 0:
            raise SequenceError("empty sequence")

    def __len__(self) -> int:
        return len(self.residues)

    def __str__(self) -> str:
        return "".join(r.code for r in self.residues)

    @property
    def codes(self) -> str:
        return str(self)

    @property
    def indices(self) -> np.ndarray:
        return np.array([r.index for r in self.residues], dtype=np.int64)


def parse_sequence(text: str) -> ProteinSequence:
    """Parse a one-letter string or a single-record FASTA.

    Whitespace is ignored and lowercase letters are upper-cased.  Positions in
    error messages are 1-based over the residue string.
    """
    name = ""
    lines = text.strip().splitlines()
    headers = [ln for ln in lines if ln.startswith(">")]
    if len(headers) > 1:
        raise SequenceError(
            f"multi-record FASTA is not supported ({len(headers)} records found)"
        )
    if headers:
        if not lines[0].startswith(">"):
            raise SequenceError("FASTA header must be the first line")
        name = lines[0][1:].strip()
        lines = lines[1:]
    body = "".join("".join(ln.split()) for ln in lines).upper()
    if not body:
        raise SequenceError("empty sequence")
    for pos, ch in enumerate(body, start=1):
        if ch not in AA_INDEX:
            raise SequenceError(f"unknown amino-acid symbol {ch!r} at position {pos}")
    return ProteinSequence(tuple(AminoAcid(c) for c in body), name=name)


@dataclass(frozen=True)
class ContactEnergyTable:
    """Symmetric 20x20 residue contact energies, indexed by ``ALPHABET``."""

    e: np.ndarray
    source: str = ""

    def __post_init__(self):
        e = np.asarray(self.e, dtype=float)
        if e.shape != (20, 20):
            raise ValueError(f"contact table must be 20x20, got {e.shape}")
        if not np.array_equal(e, e.T):
            raise ValueError("contact table is not symmetric")
        e = e.copy()
        e.setflags(write=False)
        object.__setattr__(self, "e", e)

    def __call__(self, a: str, b: str) -> float:
        return float(self.e[AA_INDEX[a], AA_INDEX[b]])

    def pair_matrix(self, seq: ProteinSequence) -> np.ndarray:
        idx = seq.indices
        return self.e[np.ix_(idx, idx)]


MJ_RESOURCE = "mj1996_contact_energies.csv"


def _read_table_text(text: str, source: str) -> ContactEnergyTable:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    header = [c.strip() for c in rows[0][1:]]
    if sorted(header) != sorted(ALPHABET):
        raise ValueError(f"{source}: header must list the 20 amino acids once each")
    cells: dict[tuple[str, str], float] = {}
    for row in rows[1:]:
        a = row[0].strip()
        for b, raw in zip(header, row[1:]):
            raw = raw.strip()
            if raw:
                cells[(a, b)] = float(raw)
    e = np.zeros((20, 20))
    for a in ALPHABET:
        for b in ALPHABET:
            vals = {cells[k] for k in ((a, b), (b, a)) if k in cells}
            if not vals:
                raise ValueError(f"{source}: missing contact energy for pair {a}-{b}")
            if len(vals) > 1:
                raise ValueError(f"{source}: asymmetric entries for pair {a}-{b}")
            e[AA_INDEX[a], AA_INDEX[b]] = vals.pop()
    return ContactEnergyTable(e, source=source)


def load_contact_table(path: str | None = None) -> ContactEnergyTable:
    """Load the embedded Miyazawa-Jernigan table, or a CSV in the same layout."""
    if path is None:
        text = resources.files("latticefold.data").joinpath(MJ_RESOURCE).read_text()
        return _read_table_text(text, MJ_RESOURCE)
    with open(path) as fh:
        return _read_table_text(fh.read(), str(path))


@dataclass(frozen=True)
class Conformation:
    turns: tuple[int, ...]
    sequence: ProteinSequence

    def __post_init__(self):
        object.__setattr__(self, "turns", tuple(int(t) for t in self.turns))
        if len(self.turns) != len(self.sequence) - 1:
            raise ValueError(
                f"{len(self.sequence)} residues need {len(self.sequence) - 1} turns, "
                f"got {len(self.turns)}"
            )
        if any(t not in (0, 1, 2, 3) for t in self.turns):
            raise ValueError(f"turn values must be in 0..3: {self.turns}")

    @property
    def backturns(self) -> int:
        return sum(1 for a, b in zip(self.turns, self.turns[1:]) if a == b)

    @property
    def symmetry_fixed(self) -> bool:
        n = len(self.turns)
        fixed = all(self.turns[k] == FIXED_TURNS[k] for k in range(min(n, 2)))
        return fixed and (n < 3 or self.turns[2] in (0, 1))

    @property
    def valid(self) -> bool:
        """Back-turn free.  Self-overlap is checked by the energy module."""
        return self.backturns == 0


def bond_signs(n_bonds: int) -> np.ndarray:
    return np.where(np.arange(1, n_bonds + 1) % 2 == 1, 1, -1)


def positions_from_turns(turns: np.ndarray) -> np.ndarray:
    """Integer bead positions for one turn vector (shape (N-1,)) or a batch
    (shape (M, N-1)); the result gains a bead axis of length N and a final
    xyz axis."""
    turns = np.asarray(turns, dtype=np.int64)
    steps = DIRECTIONS[turns] * bond_signs(turns.shape[-1])[:, None]
    zero = np.zeros(turns.shape[:-1] + (1, 3), dtype=np.int64)
    return np.concatenate([zero, np.cumsum(steps, axis=-2)], axis=-2)


def decode_positions(conf: Conformation) -> list[tuple[int, int, int]]:
    return [tuple(int(c) for c in p) for p in positions_from_turns(np.array(conf.turns))]


def bond_angles(positions: np.ndarray) -> np.ndarray:
    """Internal bead angles in degrees."""
    p = np.asarray(positions, dtype=float)
    u = p[:-2] - p[1:-1]
    v = p[2:] - p[1:-1]
    cos = np.einsum("ij,ij->i", u, v) / (
        np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1)
    )
    return np.degrees(np.arccos(np.clip(cos, -1.0, 1.0)))


# ---- bit encoding -------------------------------------------------------


def n_free_bits(n_residues: int) -> int:
    if n_residues < 4:
        raise ValueError(f"N ≥ 4 required for a free conformation (got N={n_residues})")
    return 2 * n_residues - 7


def bit_labels(n_residues: int) -> list[str]:
    labels = ["b3"]
    for k in range(4, n_residues):
        labels += [f"a{k}", f"b{k}"]
    return labels


def turn_bit_slots(n_residues: int) -> list[tuple[int | None, int | None]]:
    """For each turn k=1..N-1 the free-bit indices of (a_k, b_k); ``None``
    marks a pinned bit."""
    slots: list[tuple[int | None, int | None]] = [(None, None), (None, None)]
    if n_residues >= 4:
        slots.append((None, 0))
        for k in range(4, n_residues):
            slots.append((2 * k - 7, 2 * k - 6))
    return slots[: n_residues - 1]


def fixed_bit_value(k: int, which: str) -> int:
    """Pinned value of a_k or b_k (k is 1-based)."""
    pinned = {(1, "a"): 0, (1, "b"): 0, (2, "a"): 1, (2, "b"): 0, (3, "a"): 0}
    return pinned[(k, which)]


def turns_from_bits(bits: np.ndarray) -> np.ndarray:
    """Vectorized from_bits: bits of shape (..., 2N-7) -> turns (..., N-1)."""
    bits = np.asarray(bits, dtype=np.int64)
    n_free = bits.shape[-1]
    lead = bits.shape[:-1]
    t3 = bits[..., :1]
    rest = bits[..., 1:].reshape(lead + ((n_free - 1) // 2, 2))
    tail = 2 * rest[..., 0] + rest[..., 1]
    head = np.broadcast_to(np.array(FIXED_TURNS, dtype=np.int64), lead + (2,))
    return np.concatenate([head, t3, tail], axis=-1)


def from_bits(bits: Sequence[int], seq: ProteinSequence) -> Conformation:
    n_free = n_free_bits(len(seq))
    if len(bits) != n_free:
        raise ValueError(f"expected {n_free} bits for N={len(seq)}, got {len(bits)}")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bits must be 0 or 1")
    return Conformation(tuple(turns_from_bits(np.array(bits))), seq)


def to_bits(conf: Conformation) -> tuple[int, ...]:
    n_free_bits(len(conf.sequence))
    if not conf.symmetry_fixed:
        raise ValueError(
            f"conformation {conf.turns} is not symmetry-fixed "
            "(need t1=0, t2=2, t3 in {0,1})"
        )
    t = conf.turns
    bits = [t[2] & 1]
    for tk in t[3:]:
        bits += [tk >> 1, tk & 1]
    return tuple(bits)


def all_bit_patterns(n_bits: int) -> np.ndarray:
    """Every bit pattern as rows; row r has bit i equal to bit i of r."""
    r = np.arange(2**n_bits, dtype=np.int64)[:, None]
    return (r >> np.arange(n_bits, dtype=np.int64)) & 1


def enumerate_valid_turns(n_residues: int) -> np.ndarray:
    """All symmetry-fixed, back-turn-free turn vectors, lexicographic order."""
    n_free_bits(n_residues)
    rows = np.array([[0, 2, 0], [0, 2, 1]], dtype=np.int64)
    for _ in range(4, n_residues):
        nxt = np.arange(4, dtype=np.int64)
        grown = np.concatenate(
            [np.repeat(rows, 4, axis=0), np.tile(nxt, len(rows))[:, None]], axis=1
        )
        rows = grown[grown[:, -1] != grown[:, -2]]
    return rows


def iter_valid_conformations(seq: ProteinSequence) -> Iterable[Conformation]:
    for row in enumerate_valid_turns(len(seq)):
        yield Conformation(tuple(row), seq)
