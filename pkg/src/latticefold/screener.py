"""Problem selection: size tier, point mutations and MSA depth.

A target is flagged as quantum-amenable when it fits on one of the device
tiers and its alignment is shallow (N_eff below the target threshold).
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .model import ProteinSequence
from .resources import qubit_count

DEVICE_CAPACITIES = (127, 433, 1121)
ORPHAN_THRESHOLD = 30.0
TARGET_THRESHOLD = 60.0
DEFAULT_IDENTITY = 0.62


@dataclass(frozen=True)
class AlignmentProfile:
    sequences: tuple[str, ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.sequences:
            raise ValueError("alignment has no sequences")
        lengths = {len(s) for s in self.sequences}
        if len(lengths) != 1:
            raise ValueError(f"ragged alignment: row lengths {sorted(lengths)}")

    @property
    def depth(self) -> int:
        return len(self.sequences)

    @classmethod
    def from_rows(cls, rows, names=()) -> AlignmentProfile:
        """Keep only the query's match columns (query row gap-free)."""
        rows = [r.upper().replace(".", "-") for r in rows]
        lengths = {len(r) for r in rows}
        if len(lengths) != 1:
            raise ValueError(f"ragged alignment: row lengths {sorted(lengths)}")
        keep = [i for i, ch in enumerate(rows[0]) if ch != "-"]
        return cls(tuple("".join(r[i] for i in keep) for r in rows), tuple(names))


def _fasta_records(text: str) -> list[tuple[str, str]]:
    records, name, buf = [], None, []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith(">"):
            if name is not None:
                records.append((name, "".join(buf)))
            name, buf = line[1:].strip(), []
        else:
            if name is None:
                raise ValueError("alignment text must start with a '>' header")
            buf.append(line)
    if name is not None:
        records.append((name, "".join(buf)))
    return records


def parse_alignment(text: str, fmt: str = "auto") -> AlignmentProfile:
    """Aligned FASTA or A3M.  A3M insert states (lowercase, '.') are dropped."""
    records = _fasta_records(text)
    if fmt == "auto":
        fmt = "a3m" if any(c.islower() for _, s in records for c in s) else "fasta"
    if fmt == "a3m":
        rows = ["".join(c for c in s if not (c.islower() or c == ".")) for _, s in records]
    elif fmt == "fasta":
        rows = [s for _, s in records]
    else:
        raise ValueError(f"unknown alignment format {fmt!r}")
    return AlignmentProfile.from_rows(rows, [n for n, _ in records])


def pairwise_identity(a: str, b: str) -> float:
    """Identical residue columns over columns where either row has a residue."""
    either = sum(1 for x, y in zip(a, b) if x != "-" or y != "-")
    same = sum(1 for x, y in zip(a, b) if x == y != "-")
    return same / either if either else 0.0


def compute_neff(aln: AlignmentProfile, identity_threshold: float = DEFAULT_IDENTITY) -> float:
    """Sum over rows of 1 / (number of rows at >= threshold identity to it)."""
    arr = np.array([list(r) for r in aln.sequences])
    res = arr != "-"
    total = 0.0
    for i in range(len(arr)):
        either = (res | res[i]).sum(axis=1)
        same = ((arr == arr[i]) & res & res[i]).sum(axis=1)
        ident = np.divide(same, either, out=np.zeros(len(arr)), where=either > 0)
        ident[i] = 1.0
        total += 1.0 / int((ident >= identity_threshold).sum())
    return total


def count_mutations(query: ProteinSequence, reference: ProteinSequence) -> int:
    q, r = query.codes, reference.codes
    if len(q) != len(r):
        raise ValueError(
            f"mutation count needs equal lengths (query {len(q)}, reference {len(r)})"
        )
    return sum(a != b for a, b in zip(q, r))


def msa_flag(n_eff: float | None, orphan=ORPHAN_THRESHOLD, target=TARGET_THRESHOLD) -> str:
    if n_eff is None:
        return "unknown"
    if n_eff < orphan:
        return "orphan-like"
    if n_eff < target:
        return "target"
    return "deep"


def device_tier(qubits: int, capacities=DEVICE_CAPACITIES) -> int | None:
    return next((c for c in sorted(capacities) if c >= qubits), None)


@dataclass
class HardnessReport:
    sequence: str
    length: int
    mutations: int | None
    n_eff: float | None
    qubit_need: int
    tier: int | None
    msa_flag: str
    amenable: bool
    rationale: str

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def tsv_header(self) -> str:
        return "\t".join(self.to_dict())

    def tsv_line(self) -> str:
        def fmt(v):
            if v is None:
                return "NA"
            if isinstance(v, float):
                return f"{v:.3f}"
            return str(v)

        return "\t".join(fmt(v) for v in self.to_dict().values())


def screen(
    seq: ProteinSequence,
    reference: ProteinSequence | None = None,
    alignment: AlignmentProfile | None = None,
    n_eff: float | None = None,
    identity_threshold: float = DEFAULT_IDENTITY,
    orphan_threshold: float = ORPHAN_THRESHOLD,
    target_threshold: float = TARGET_THRESHOLD,
    capacities=DEVICE_CAPACITIES,
) -> HardnessReport:
    """Classify one target.  An explicit ``n_eff`` overrides the alignment."""
    need = qubit_count(len(seq)).total_qubits
    tier = device_tier(need, capacities)
    muts = count_mutations(seq, reference) if reference is not None else None
    if n_eff is None and alignment is not None:
        n_eff = compute_neff(alignment, identity_threshold)
    flag = msa_flag(n_eff, orphan_threshold, target_threshold)
    amenable = tier is not None and flag in ("orphan-like", "target")

    why = [f"N={len(seq)} needs {need} qubits"]
    why.append(
        f"fits the {tier}-qubit tier" if tier else f"exceeds every tier {tuple(capacities)}"
    )
    if n_eff is None:
        why.append("no MSA depth supplied")
    else:
        why.append(f"N_eff={n_eff:.2f} -> {flag}")
    if muts is not None:
        why.append(f"{muts} point mutation(s) vs reference")
    return HardnessReport(
        sequence=seq.codes, length=len(seq), mutations=muts, n_eff=n_eff,
        qubit_need=need, tier=tier, msa_flag=flag, amenable=amenable,
        rationale="; ".join(why),
    )
