"""Device-agnostic quantum resource estimates and the Levinthal calculator."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

SECONDS_PER_YEAR = 3.1536e7
SECONDS_PER_CONFORMATION = 1e-12
DEFAULT_EPSILONS = (1.0, 5.0, 10.0)


@dataclass
class ResourceEstimate:
    N: int
    config_qubits: int
    interaction_qubits: int
    total_qubits: int
    T: int | None = None
    h_max: float | None = None
    shots_bound: dict[float, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["shots_bound"] = {str(k): v for k, v in self.shots_bound.items()}
        return d


def interaction_qubits(n_residues: int) -> int:
    """One ancilla per odd separation d in [5, N-1], N - d pairs each.

    Closed form: floor((N - 4)^2 / 4).
    """
    return sum(n_residues - d for d in range(5, n_residues, 2))


def qubit_count(n_residues: int) -> ResourceEstimate:
    if n_residues < 4:
        raise ValueError(f"N ≥ 4 required (got N={n_residues})")
    config = 2 * n_residues - 7
    inter = interaction_qubits(n_residues)
    return ResourceEstimate(n_residues, config, inter, config + inter)


def shots_bound_exact(h_max: float, T: int, eps: float) -> float:
    if eps <= 0:
        raise ValueError("energy tolerance eps must be positive")
    if h_max <= 0 or T < 0:
        raise ValueError("need h_max > 0 and T >= 0")
    return h_max**2 * (1 + T) / eps**2


def shots_bound(h_max: float, T: int, eps: float) -> int:
    """Measurement upper bound ceil(h_max^2 (1 + T) / eps^2)."""
    return math.ceil(shots_bound_exact(h_max, T, eps) - 1e-9)


def estimate(n_residues: int, spin_poly=None, epsilons: Iterable[float] = DEFAULT_EPSILONS):
    """Qubit counts, plus shot bounds when a spin Hamiltonian is supplied."""
    est = qubit_count(n_residues)
    if spin_poly is not None:
        est.T, est.h_max = spin_poly.T, spin_poly.h_max
        est.shots_bound = {float(e): shots_bound(est.h_max, est.T, e) for e in epsilons}
    return est


@dataclass
class QuadraticFit:
    a: float
    b: float
    c: float
    residual_norm: float

    def __call__(self, n):
        return self.a * n**2 + self.b * n + self.c


def fit_quadratic(points: Sequence[tuple[float, float]]) -> QuadraticFit:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(np.unique(pts[:, 0])) < 3:
        raise ValueError("quadratic fit needs at least 3 distinct N values")
    X = np.vander(pts[:, 0], 3)
    if np.linalg.matrix_rank(X) < 3:
        raise ValueError("degenerate design matrix")
    coef, *_ = np.linalg.lstsq(X, pts[:, 1], rcond=None)
    resid = float(np.linalg.norm(X @ coef - pts[:, 1]))
    return QuadraticFit(*map(float, coef), residual_norm=resid)


def scaling_table(n_values: Iterable[int]) -> list[ResourceEstimate]:
    return [qubit_count(n) for n in n_values]


def scaling_csv(n_values: Iterable[int]) -> str:
    rows = ["N,config,interaction,total"]
    rows += [
        f"{e.N},{e.config_qubits},{e.interaction_qubits},{e.total_qubits}"
        for e in scaling_table(n_values)
    ]
    return "\n".join(rows) + "\n"


@dataclass
class LevinthalEstimate:
    n: int
    conformations: int
    exploration_seconds: float
    exploration_years: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "conformations": str(self.conformations),
            "exploration_seconds": self.exploration_seconds,
            "exploration_years": self.exploration_years,
        }


def levinthal(n: int) -> LevinthalEstimate:
    """3 backbone states per dihedral, 2 dihedrals per peptide bond, 1 ps each."""
    if n < 1:
        raise ValueError("n >= 1 required")
    count = 3 ** (2 * (n - 1))
    try:
        seconds = count * SECONDS_PER_CONFORMATION
    except OverflowError:
        seconds = math.inf
    return LevinthalEstimate(n, count, seconds, seconds / SECONDS_PER_YEAR)

