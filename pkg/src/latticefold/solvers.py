"""Minimizers for the lattice folding model.

* ``solve_exhaustive``: enumerate every symmetry-fixed, back-turn-free fold.
* ``solve_anneal``: Metropolis simulated annealing over turn space.
* ``solve_cvar_vqe``: statevector simulation of a Y-rotation ansatz whose
  parameters are tuned against the CVaR of sampled basis-state energies.
* ``solve_qubo_bruteforce`` / ``minimize_poly_bruteforce``: exact search over
  bit space for QUBO programs and native polynomials.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.optimize import minimize

from .energy import EnergyModel, Mode, Penalties, evaluate
from .hamiltonian import build_hamiltonian
from .model import (
    ContactEnergyTable,
    Conformation,
    ProteinSequence,
    all_bit_patterns,
    enumerate_valid_turns,
    n_free_bits,
    turns_from_bits,
)
from .polynomial import PseudoBooleanPoly, eval_poly_batch
from .quadratize import QuboProgram

log = logging.getLogger(__name__)

EXHAUSTIVE_CAP = 14
VQE_QUBIT_CAP = 24
QUBO_VAR_CAP = 24


class SolverError(ValueError):
    """A solver precondition was violated."""


@dataclass
class SolveResult:
    best_energy: float
    best_conformation: Conformation
    evaluations: int
    trace: list[tuple[int, float, float]]
    solver_id: str
    rng_seed: int | None = None
    extras: dict = field(default_factory=dict)

    def trace_csv(self) -> str:
        lines = ["step,objective,best_so_far"]
        lines += [f"{s},{o!r},{b!r}" for s, o, b in self.trace]
        return "\n".join(lines) + "\n"


def _require_foldable(seq: ProteinSequence):
    if len(seq) < 4:
        raise SolverError(f"N ≥ 4 required (got N={len(seq)})")


def _pick_best(energies: np.ndarray, turns: np.ndarray, tol: float = 1e-9) -> int:
    """Index of the minimum; ties go to the lexicographically smallest turns."""
    lo = energies.min()
    tied = np.flatnonzero(energies <= lo + tol)
    return int(min(tied, key=lambda i: tuple(turns[i])))


# ---- exhaustive ---------------------------------------------------------


def solve_exhaustive(
    seq: ProteinSequence,
    table: ContactEnergyTable,
    mode: Mode = "physical",
    penalties: Penalties = Penalties(),
    cap: int = EXHAUSTIVE_CAP,
    spectrum: bool = False,
) -> SolveResult:
    _require_foldable(seq)
    if len(seq) > cap:
        raise SolverError(
            f"N={len(seq)} exceeds the exhaustive cap of {cap}; use the anneal or vqe solver"
        )
    turns = enumerate_valid_turns(len(seq))
    expected = 2 * 3 ** (len(seq) - 4)
    assert len(turns) == expected, (len(turns), expected)
    scores = EnergyModel(seq, table, mode, penalties).batch(turns)
    totals = scores["total"]
    best = _pick_best(totals, turns)
    conf = Conformation(tuple(turns[best]), seq)
    n_min = int((totals <= totals[best] + 1e-9).sum())
    extras = {"n_enumerated": len(turns), "n_degenerate_minima": n_min}
    if spectrum:
        order = np.lexsort((np.arange(len(totals)), totals))
        extras["spectrum"] = [(tuple(int(t) for t in turns[i]), float(totals[i])) for i in order]
    running = np.minimum.accumulate(totals)
    trace = [(i, float(totals[i]), float(running[i])) for i in range(len(totals))]
    return SolveResult(
        best_energy=evaluate(conf, table, mode, penalties).total,
        best_conformation=conf,
        evaluations=len(turns),
        trace=trace,
        solver_id="exhaustive",
        extras=extras,
    )


# ---- simulated annealing -----------------------------------------------


@dataclass(frozen=True)
class AnnealSchedule:
    T_start: float = 5.0
    T_end: float = 0.05
    sweeps: int = 300
    restarts: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if not (self.T_start >= self.T_end > 0):
            raise SolverError("schedule needs T_start >= T_end > 0")
        if self.sweeps < 1 or self.restarts < 1:
            raise SolverError("sweeps and restarts must be >= 1")

    def temperatures(self) -> np.ndarray:
        if self.sweeps == 1:
            return np.array([self.T_start])
        return self.T_start * (self.T_end / self.T_start) ** (
            np.arange(self.sweeps) / (self.sweeps - 1)
        )


def _allowed_turns(turns: list[int], k: int) -> list[int]:
    """Values for 0-based turn slot k that differ from both neighbours."""
    pool = (0, 1) if k == 2 else (0, 1, 2, 3)
    banned = {turns[k - 1]}
    if k + 1 < len(turns):
        banned.add(turns[k + 1])
    return [v for v in pool if v not in banned]


def random_valid_turns(n_residues: int, rng: np.random.Generator) -> list[int]:
    turns = [0, 2, int(rng.integers(2))]
    for _ in range(4, n_residues):
        turns.append(int(rng.choice([v for v in range(4) if v != turns[-1]])))
    return turns


def _anneal_chain(model: EnergyModel, schedule: AnnealSchedule, rng, initial):
    n = len(model.seq)
    turns = list(initial) if initial is not None else random_valid_turns(n, rng)
    energy = model.total(turns)
    best_turns, best = list(turns), energy
    evaluations = 1
    trace = []
    free = np.arange(2, n - 1)
    for T in schedule.temperatures():
        for _ in range(len(free)):
            k = int(rng.choice(free))
            options = _allowed_turns(turns, k)
            new = int(options[rng.integers(len(options))])
            if new == turns[k]:
                continue
            trial = list(turns)
            trial[k] = new
            e_new = model.total(trial)
            evaluations += 1
            dE = e_new - energy
            if dE <= 0 or rng.random() < math.exp(-dE / T):
                turns, energy = trial, e_new
                if energy < best - 1e-12 or (
                    abs(energy - best) <= 1e-12 and tuple(turns) < tuple(best_turns)
                ):
                    best_turns, best = list(turns), energy
        trace.append((energy, best))
    return best_turns, best, evaluations, trace


def solve_anneal(
    seq: ProteinSequence,
    table: ContactEnergyTable,
    schedule: AnnealSchedule = AnnealSchedule(),
    mode: Mode = "physical",
    penalties: Penalties = Penalties(),
    initial: tuple[int, ...] | None = None,
    workers: int = 1,
) -> SolveResult:
    """Simulated annealing with independent restarts.

    Restart r draws from the r-th child of ``SeedSequence(rng_seed)``, so the
    result does not depend on ``workers``.
    """
    _require_foldable(seq)
    model = EnergyModel(seq, table, mode, penalties)
    if initial is not None:
        Conformation(tuple(initial), seq)
    seeds = np.random.SeedSequence(schedule.rng_seed).spawn(schedule.restarts)

    def run(ss):
        return _anneal_chain(model, schedule, np.random.default_rng(ss), initial)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chains = list(pool.map(run, seeds))
    else:
        chains = [run(ss) for ss in seeds]

    bests = np.array([c[1] for c in chains])
    best_turns = np.array([c[0] for c in chains])
    i = _pick_best(bests, best_turns)
    conf = Conformation(tuple(best_turns[i]), seq)
    trace, step, overall = [], 0, math.inf
    for c in chains:
        for current, _ in c[3]:
            overall = min(overall, current)
            trace.append((step, float(current), float(overall)))
            step += 1
    return SolveResult(
        best_energy=evaluate(conf, table, mode, penalties).total,
        best_conformation=conf,
        evaluations=sum(c[2] for c in chains),
        trace=trace,
        solver_id="anneal",
        rng_seed=schedule.rng_seed,
        extras={
            "restart_bests": [float(b) for b in bests],
            "restart_turns": [tuple(int(t) for t in c[0]) for c in chains],
        },
    )


# ---- CVaR-VQE -------------------------------------------------------------


@dataclass(frozen=True)
class VqeConfig:
    layers: int = 1
    alpha: float = 0.1
    shots: int | None = 1024
    budget: int = 300
    restarts: int = 1
    rng_seed: int = 0
    entangler: Literal["linear", "ring"] = "linear"
    full_ancilla: bool = False
    qubit_cap: int = VQE_QUBIT_CAP

    def __post_init__(self):
        if not (0 < self.alpha <= 1):
            raise SolverError("alpha must lie in (0, 1]")
        if self.shots is not None and self.shots < 1:
            raise SolverError("shots must be >= 1")
        if self.layers < 0 or self.budget < 1 or self.restarts < 1:
            raise SolverError("layers >= 0, budget >= 1 and restarts >= 1 required")


def cvar(values: np.ndarray, alpha: float) -> float:
    """Mean of the lowest ceil(alpha * len) values."""
    v = np.sort(np.asarray(values, dtype=float))
    k = max(1, math.ceil(alpha * len(v) - 1e-12))
    return float(v[:k].mean())


def cvar_exact(energies: np.ndarray, probs: np.ndarray, alpha: float) -> float:
    """CVaR of a discrete distribution: the lowest alpha probability mass."""
    order = np.argsort(energies, kind="stable")
    e, p = energies[order], probs[order]
    before = np.concatenate([[0.0], np.cumsum(p)[:-1]])
    w = np.clip(alpha - before, 0.0, p)
    return float((w * e).sum() / alpha)


class RyAnsatz:
    """Y-rotation layer, then ``layers`` blocks of CX entanglers + Y rotations.

    Qubit q is bit q of the basis-state index.  Amplitudes stay real.
    """

    def __init__(self, n_qubits: int, layers: int = 1, entangler: str = "linear"):
        self.n = n_qubits
        self.layers = layers
        pairs = [(q, q + 1) for q in range(n_qubits - 1)]
        if entangler == "ring" and n_qubits > 2:
            pairs.append((n_qubits - 1, 0))
        elif entangler not in ("linear", "ring"):
            raise SolverError(f"unknown entangler topology {entangler!r}")
        idx = np.arange(2**n_qubits)
        self._cx_perms = []
        for c, t in pairs:
            perm = idx.copy()
            on = ((idx >> c) & 1).astype(bool)
            perm[on] = idx[on] ^ (1 << t)
            self._cx_perms.append(perm)

    @property
    def n_params(self) -> int:
        return self.n * (self.layers + 1)

    def _ry_layer(self, psi: np.ndarray, thetas: np.ndarray) -> np.ndarray:
        for q, th in enumerate(thetas):
            c, s = math.cos(th / 2), math.sin(th / 2)
            v = psi.reshape(2 ** (self.n - q - 1), 2, 2**q)
            a0, a1 = v[:, 0, :].copy(), v[:, 1, :].copy()
            v[:, 0, :] = c * a0 - s * a1
            v[:, 1, :] = s * a0 + c * a1
        return psi

    def statevector(self, params) -> np.ndarray:
        params = np.asarray(params, dtype=float).reshape(self.layers + 1, self.n)
        psi = np.zeros(2**self.n)
        psi[0] = 1.0
        psi = self._ry_layer(psi, params[0])
        for layer in params[1:]:
            for perm in self._cx_perms:
                psi = psi[perm]
            psi = self._ry_layer(psi, layer)
        return psi


def _sample(probs_cdf: np.ndarray, shots: int, rng) -> np.ndarray:
    u = rng.random(shots) * probs_cdf[-1]
    return np.minimum(np.searchsorted(probs_cdf, u, side="right"), len(probs_cdf) - 1)


class CvarVqe:
    """Diagonal energies over all basis states plus the CVaR objective."""

    def __init__(self, seq, table, cfg: VqeConfig, penalties: Penalties = Penalties()):
        _require_foldable(seq)
        self.seq, self.cfg = seq, cfg
        n_cfg = n_free_bits(len(seq))
        if cfg.full_ancilla:
            self.ham = build_hamiltonian(seq, table, backturn_penalty=penalties.backturn)
            n_qubits = self.ham.layout.size
        else:
            self.ham = None
            n_qubits = n_cfg
        if n_qubits > cfg.qubit_cap:
            raise SolverError(
                f"{n_qubits} qubits exceeds the statevector cap of {cfg.qubit_cap}"
            )
        self.n_qubits = n_qubits
        self.n_config = n_cfg
        self.ansatz = RyAnsatz(n_qubits, cfg.layers, cfg.entangler)
        # objective: what min-over-ancillas of the Hamiltonian assigns each state
        objective_model = EnergyModel(seq, table, "clamped", Penalties(0.0, penalties.backturn))
        exact_model = EnergyModel(seq, table, "physical", penalties)
        self.energies = np.empty(2**n_qubits)
        self.rescored = np.empty(2**n_qubits)
        self.turns = np.empty((2**n_qubits, len(seq) - 1), dtype=np.int64)
        chunk = 1 << 16
        for start in range(0, 2**n_qubits, chunk):
            idx = np.arange(start, min(start + chunk, 2**n_qubits), dtype=np.int64)
            bits = (idx[:, None] >> np.arange(n_qubits, dtype=np.int64)) & 1
            turns = turns_from_bits(bits[:, :n_cfg])
            self.turns[idx] = turns
            if self.ham is not None:
                self.energies[idx] = eval_poly_batch(self.ham.poly, bits)
            else:
                self.energies[idx] = objective_model.batch(turns)["total"]
            self.rescored[idx] = exact_model.batch(turns)["total"]

    def objective(self, params, rng=None, track=None) -> float:
        psi = self.ansatz.statevector(params)
        probs = psi * psi
        if self.cfg.shots is None:
            if track is not None:
                track(np.flatnonzero(probs > 1e-12))
            return cvar_exact(self.energies, probs, self.cfg.alpha)
        samples = _sample(np.cumsum(probs), self.cfg.shots, rng)
        if track is not None:
            track(np.unique(samples))
        return cvar(self.energies[samples], self.cfg.alpha)


def solve_cvar_vqe(
    seq: ProteinSequence,
    table: ContactEnergyTable,
    cfg: VqeConfig = VqeConfig(),
    penalties: Penalties = Penalties(),
) -> SolveResult:
    """Run the sampled CVaR-VQE loop and return the best state it ever sampled.

    Sampled states are ranked by their exact re-scored energy (including the
    overlap penalty the Hamiltonian does not carry).
    """
    vqe = CvarVqe(seq, table, cfg, penalties)
    rng = np.random.default_rng(cfg.rng_seed)
    best = {"idx": None}
    trace: list[tuple[int, float, float]] = []

    def track(indices):
        cand = indices
        if best["idx"] is not None:
            cand = np.append(cand, best["idx"])
        best["idx"] = int(cand[_pick_best(vqe.rescored[cand], vqe.turns[cand])])

    def fun(x):
        val = vqe.objective(x, rng, track)
        prev = trace[-1][2] if trace else math.inf
        trace.append((len(trace), val, min(prev, val)))
        return val

    per_restart = max(1, cfg.budget // cfg.restarts)
    final_params = []
    for _ in range(cfg.restarts):
        x0 = rng.uniform(-math.pi, math.pi, vqe.ansatz.n_params)
        res = minimize(
            fun, x0, method="Nelder-Mead",
            options={"maxfev": per_restart, "xatol": 1e-4, "fatol": 1e-6},
        )
        final_params.append(res.x.tolist())

    conf = Conformation(tuple(int(t) for t in vqe.turns[best["idx"]]), seq)
    return SolveResult(
        best_energy=evaluate(conf, table, "physical", penalties).total,
        best_conformation=conf,
        evaluations=len(trace),
        trace=trace,
        solver_id="cvar_vqe",
        rng_seed=cfg.rng_seed,
        extras={
            "n_qubits": vqe.n_qubits,
            "best_bitstring": format(best["idx"], f"0{vqe.n_qubits}b")[::-1],
            "final_objective": trace[-1][1],
            "final_params": final_params,
        },
    )


# ---- bit-space brute force -------------------------------------------------


def _split_enumerate(n_vars: int, energy_fn, tol: float = 1e-9):
    """Min and argmin rows of energy over all 2**n_vars assignments.

    ``energy_fn(low_bits, high_bits)`` returns the (2**lo, 2**hi) energy grid.
    """
    lo = (n_vars + 1) // 2
    hi = n_vars - lo
    low, high = all_bit_patterns(lo), all_bit_patterns(hi)
    grid = energy_fn(low, high)
    m = float(grid.min())
    li, hj = np.nonzero(grid <= m + tol * max(1.0, abs(m)))
    argmin = [tuple(int(v) for v in np.concatenate([low[a], high[b]])) for a, b in zip(li, hj)]
    return m, sorted(argmin)


def solve_qubo_bruteforce(q: QuboProgram, cap: int = QUBO_VAR_CAP):
    """Exact minimum of a QUBO program and every assignment attaining it."""
    if q.n_vars > cap:
        raise SolverError(f"{q.n_vars} variables exceeds the brute-force cap of {cap}")
    Q = q.matrix()
    lo = (q.n_vars + 1) // 2

    def grid(low, high):
        A, B, C = Q[:lo, :lo], Q[lo:, lo:], Q[:lo, lo:] + Q[lo:, :lo].T
        el = np.einsum("ri,ij,rj->r", low, A, low)
        eh = np.einsum("ri,ij,rj->r", high, B, high)
        return q.offset + el[:, None] + eh[None, :] + low @ C @ high.T

    return _split_enumerate(q.n_vars, grid)


def minimize_poly_bruteforce(poly: PseudoBooleanPoly, n_vars: int, cap: int = QUBO_VAR_CAP):
    """Exact minimum of a native (any-degree) polynomial over n_vars bits."""
    if n_vars > cap:
        raise SolverError(f"{n_vars} variables exceeds the brute-force cap of {cap}")
    bits = all_bit_patterns(n_vars)
    e = eval_poly_batch(poly, bits)
    m = float(e.min())
    rows = np.flatnonzero(e <= m + 1e-9 * max(1.0, abs(m)))
    return m, sorted(tuple(int(v) for v in bits[r]) for r in rows)
