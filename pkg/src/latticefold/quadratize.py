"""Degree reduction of pseudo-Boolean polynomials to QUBO by pair substitution.

Each round picks the variable pair shared by the most monomials of degree >= 3
(ties go to the lexicographically smallest pair), introduces an ancilla w for
the product xy, and adds the penalty M * (xy - 2xw - 2yw + 3w), which is zero
exactly when w == xy and at least M otherwise.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .polynomial import Monomial, PseudoBooleanPoly, SpinPoly, to_spin


@dataclass(frozen=True)
class QuboProgram:
    linear: dict[int, float]
    quadratic: dict[tuple[int, int], float]
    offset: float
    n_vars: int
    n_original: int
    ancillas: dict[int, tuple[int, int]] = field(default_factory=dict)
    penalty: float = 1.0

    def __post_init__(self):
        if self.penalty <= 0:
            raise ValueError("penalty weight must be positive")
        for w, (x, y) in self.ancillas.items():
            if not (x < w and y < w):
                raise ValueError(f"ancilla {w} must come after its parents {x}, {y}")

    def to_poly(self) -> PseudoBooleanPoly:
        terms: dict[Monomial, float] = {(): self.offset}
        terms.update({(i,): c for i, c in self.linear.items()})
        terms.update({tuple(sorted(k)): c for k, c in self.quadratic.items()})
        return PseudoBooleanPoly(terms)

    def to_spin(self) -> SpinPoly:
        return qubo_to_spin(self)

    @property
    def n_ancilla(self) -> int:
        return len(self.ancillas)

    def matrix(self) -> np.ndarray:
        """Upper-triangular Q with linear terms on the diagonal."""
        q = np.zeros((self.n_vars, self.n_vars))
        for i, c in self.linear.items():
            q[i, i] += c
        for (i, j), c in self.quadratic.items():
            q[min(i, j), max(i, j)] += c
        return q

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(x @ self.matrix() @ x + self.offset)

    def to_text(self) -> str:
        lines = [f"-1 -1 {self.offset!r}"]
        lines += [f"{i} {i} {c!r}" for i, c in sorted(self.linear.items())]
        lines += [f"{i} {j} {c!r}" for (i, j), c in sorted(self.quadratic.items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, metadata: dict | None = None) -> QuboProgram:
        linear: dict[int, float] = {}
        quadratic: dict[tuple[int, int], float] = {}
        offset = 0.0
        top = -1
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                i_s, j_s, c_s = line.split()
                i, j, c = int(i_s), int(j_s), float(c_s)
            except ValueError as exc:
                raise ValueError(f"line {lineno}: expected 'i j coeff', got {line!r}") from exc
            if i == -1 and j == -1:
                offset += c
            elif i == j:
                linear[i] = linear.get(i, 0.0) + c
            else:
                key = (min(i, j), max(i, j))
                quadratic[key] = quadratic.get(key, 0.0) + c
            top = max(top, i, j)
        meta = metadata or {}
        anc = {int(w): tuple(p) for w, p in meta.get("ancillas", {}).items()}
        n_vars = int(meta.get("n_vars", top + 1))
        return cls(
            linear, quadratic, offset, n_vars,
            int(meta.get("n_original", n_vars - len(anc))), anc,
            float(meta.get("penalty", 1.0)),
        )

    def metadata(self) -> dict:
        spin = self.to_spin()
        return {
            "n_vars": self.n_vars,
            "n_original": self.n_original,
            "n_ancilla": self.n_ancilla,
            "penalty": self.penalty,
            "ancillas": {str(w): list(p) for w, p in sorted(self.ancillas.items())},
            "boolean_terms": len(self.linear) + len(self.quadratic),
            "spin_terms": spin.T,
            "T": spin.T,
            "h_max": spin.h_max,
        }

    def metadata_json(self) -> str:
        return json.dumps(self.metadata(), indent=2)


def auto_penalty(poly: PseudoBooleanPoly) -> float:
    return 2.0 * poly.abs_sum() + 1.0


def _best_pair(terms: dict[Monomial, float]) -> tuple[int, int] | None:
    counts: Counter = Counter()
    for m in terms:
        if len(m) >= 3:
            counts.update(combinations(m, 2))
    if not counts:
        return None
    top = max(counts.values())
    return min(p for p, k in counts.items() if k == top)


def quadratize(poly: PseudoBooleanPoly, penalty: float | str = "auto") -> QuboProgram:
    M = auto_penalty(poly) if penalty == "auto" else float(penalty)
    if M <= 0:
        raise ValueError("penalty weight must be positive")
    n_original = max(poly.variables, default=-1) + 1
    next_var = n_original
    terms = dict(poly.terms)
    penalties: dict[Monomial, float] = {}
    ancillas: dict[int, tuple[int, int]] = {}

    while (pair := _best_pair(terms)) is not None:
        x, y = pair
        w = next_var
        next_var += 1
        ancillas[w] = pair
        rewritten: dict[Monomial, float] = {}
        for m, c in terms.items():
            if len(m) >= 3 and x in m and y in m:
                m = tuple(sorted([v for v in m if v not in pair] + [w]))
            rewritten[m] = rewritten.get(m, 0.0) + c
        terms = rewritten
        for m, c in (((x, y), M), ((x, w), -2 * M), ((y, w), -2 * M), ((w,), 3 * M)):
            penalties[m] = penalties.get(m, 0.0) + c

    merged = PseudoBooleanPoly(terms) + PseudoBooleanPoly(penalties)
    linear = {m[0]: c for m, c in merged.terms.items() if len(m) == 1}
    quad = {(m[0], m[1]): c for m, c in merged.terms.items() if len(m) == 2}
    return QuboProgram(linear, quad, merged.constant, next_var, n_original, ancillas, M)


def qubo_to_spin(q: QuboProgram) -> SpinPoly:
    return to_spin(q.to_poly())


def ancillas_consistent(q: QuboProgram, x) -> bool:
    x = np.asarray(x)
    return all(x[w] == x[a] * x[b] for w, (a, b) in q.ancillas.items())
