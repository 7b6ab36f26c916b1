"""C-alpha traces: lattice-to-Angstrom scaling, XYZ/PDB text, RMSD and Rg."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ONE_LETTER, Conformation, positions_from_turns

CA_CA_DISTANCE = 3.8
DEFAULT_SCALE = CA_CA_DISTANCE / math.sqrt(3.0)


@dataclass(frozen=True)
class CaTrace:
    names: tuple[str, ...]
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float).reshape(-1, 3)
        if len(c) != len(self.names):
            raise ValueError(f"{len(self.names)} residue names for {len(c)} coordinates")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "coords", c)

    def __len__(self) -> int:
        return len(self.names)

    @property
    def sequence(self) -> str:
        return "".join(ONE_LETTER.get(n, "X") for n in self.names)


def to_trace(conf: Conformation, scale: float = DEFAULT_SCALE) -> CaTrace:
    pos = positions_from_turns(np.array(conf.turns)).astype(float) * scale
    return CaTrace(tuple(r.three_letter for r in conf.sequence.residues), pos)


def write_xyz(trace: CaTrace, comment: str = "") -> str:
    lines = [str(len(trace)), comment]
    lines += [f"CA {x:.3f} {y:.3f} {z:.3f}" for x, y, z in trace.coords]
    return "\n".join(lines) + "\n"


def pdb_atom_line(serial: int, resname: str, resseq: int, xyz, chain: str = "A") -> str:
    x, y, z = xyz
    return (
        f"ATOM  {serial:5d}  CA  {resname:>3s} {chain}{resseq:4d}    "
        f"{x:8.3f}{y:8.3f}{z:8.3f}{1.0:6.2f}{0.0:6.2f}          {'C':>2s}"
    )


def write_pdb(trace: CaTrace, chain: str = "A") -> str:
    lines = [
        pdb_atom_line(i, name, i, xyz, chain)
        for i, (name, xyz) in enumerate(zip(trace.names, trace.coords), start=1)
    ]
    if len(trace):
        n = len(trace)
        lines.append(f"TER   {n + 1:5d}      {trace.names[-1]:>3s} {chain}{n:4d}")
    lines.append("END")
    return "\n".join(lines) + "\n"


def parse_pdb(text: str, chain: str | None = None) -> CaTrace:
    """C-alpha atoms from ATOM records (first model, first altloc only)."""
    names, coords = [], []
    seen = set()
    for line in text.splitlines():
        rec = line[:6]
        if rec == "ENDMDL":
            break
        if rec != "ATOM  " or line[12:16].strip() != "CA":
            continue
        if chain is not None and line[21] != chain:
            continue
        key = (line[21], line[22:27])
        if key in seen:
            continue
        seen.add(key)
        names.append(line[17:20].strip())
        coords.append((float(line[30:38]), float(line[38:46]), float(line[46:54])))
    return CaTrace(tuple(names), np.array(coords, dtype=float).reshape(-1, 3))


def _coords(t) -> np.ndarray:
    return t.coords if isinstance(t, CaTrace) else np.asarray(t, dtype=float)


def kabsch_rotation(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Proper rotation R minimizing |a_centered @ R.T - b_centered|."""
    h = (a - a.mean(0)).T @ (b - b.mean(0))
    u, _, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(vt.T @ u.T)) or 1.0
    return vt.T @ np.diag([1.0, 1.0, d]) @ u.T


def rmsd_kabsch(a, b) -> float:
    """RMSD after optimal rigid superposition (rotation + translation only)."""
    x, y = _coords(a), _coords(b)
    if x.shape != y.shape:
        raise ValueError(f"traces differ in length: {len(x)} vs {len(y)}")
    if len(x) == 0:
        raise ValueError("empty trace")
    r = kabsch_rotation(x, y)
    diff = (x - x.mean(0)) @ r.T - (y - y.mean(0))
    return float(math.sqrt((diff**2).sum() / len(x)))


def radius_of_gyration(trace) -> float:
    x = _coords(trace)
    if len(x) == 0:
        raise ValueError("empty trace")
    return float(math.sqrt(((x - x.mean(0)) ** 2).sum(axis=1).mean()))
