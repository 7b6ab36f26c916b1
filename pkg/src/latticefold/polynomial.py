"""Sparse multilinear polynomials over binary (0/1) or spin (+1/-1) variables.

Monomials are sorted tuples of variable indices; the empty tuple holds the
constant.  Binary polynomials reduce x*x -> x, spin polynomials z*z -> 1.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

Monomial = tuple[int, ...]

ZERO_TOL = 1e-12


def _clean(terms: Mapping[Monomial, float]) -> dict[Monomial, float]:
    return {m: float(c) for m, c in terms.items() if abs(c) > ZERO_TOL}


def _sorted_terms(terms: Mapping[Monomial, float]) -> list[tuple[Monomial, float]]:
    return sorted(terms.items(), key=lambda kv: (len(kv[0]), kv[0]))


@dataclass(frozen=True)
class _Poly:
    terms: dict[Monomial, float] = field(default_factory=dict)

    def __post_init__(self):
        norm: dict[Monomial, float] = defaultdict(float)
        for m, c in self.terms.items():
            norm[self._canon(m)] += c
        object.__setattr__(self, "terms", _clean(norm))

    @staticmethod
    def _canon(m: Iterable[int]) -> Monomial:
        raise NotImplementedError

    @property
    def constant(self) -> float:
        return self.terms.get((), 0.0)

    @property
    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    @property
    def variables(self) -> list[int]:
        return sorted({v for m in self.terms for v in m})

    @property
    def num_terms(self) -> int:
        """Non-constant term count."""
        return sum(1 for m in self.terms if m)

    @property
    def h_max(self) -> float:
        return max((abs(c) for m, c in self.terms.items() if m), default=0.0)

    def items(self):
        return _sorted_terms(self.terms)

    def abs_sum(self) -> float:
        return sum(abs(c) for c in self.terms.values())

    def to_text(self) -> str:
        lines = [" ".join([repr(c)] + [str(i) for i in m]) for m, c in self.items()]
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str):
        terms: dict[Monomial, float] = defaultdict(float)
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                coeff = float(parts[0])
                idx = tuple(int(p) for p in parts[1:])
            except ValueError as exc:
                raise ValueError(f"line {lineno}: cannot parse {line!r}") from exc
            if any(i < 0 for i in idx):
                raise ValueError(f"line {lineno}: negative variable index")
            terms[idx] += coeff
        return cls(dict(terms))

    def relabel(self, mapping: Mapping[int, int]):
        return type(self)({tuple(mapping[v] for v in m): c for m, c in self.terms.items()})


class PseudoBooleanPoly(_Poly):
    """Multilinear polynomial in 0/1 variables."""

    @staticmethod
    def _canon(m):
        return tuple(sorted(set(m)))

    def __add__(self, other: PseudoBooleanPoly) -> PseudoBooleanPoly:
        out = defaultdict(float, self.terms)
        for m, c in other.terms.items():
            out[m] += c
        return PseudoBooleanPoly(dict(out))

    def __sub__(self, other: PseudoBooleanPoly) -> PseudoBooleanPoly:
        return self + other.scale(-1.0)

    def __mul__(self, other):
        if not isinstance(other, PseudoBooleanPoly):
            return self.scale(float(other))
        out: dict[Monomial, float] = defaultdict(float)
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                out[tuple(sorted(set(m1) | set(m2)))] += c1 * c2
        return PseudoBooleanPoly(dict(out))

    __rmul__ = __mul__

    def scale(self, k: float) -> PseudoBooleanPoly:
        return PseudoBooleanPoly({m: k * c for m, c in self.terms.items()})

    @classmethod
    def const(cls, c: float) -> PseudoBooleanPoly:
        return cls({(): c})

    @classmethod
    def var(cls, i: int) -> PseudoBooleanPoly:
        return cls({(i,): 1.0})

    def evaluate(self, assignment) -> float:
        return eval_poly(self, assignment)


class SpinPoly(_Poly):
    """Multilinear polynomial in spin variables z = 1 - 2b."""

    @staticmethod
    def _canon(m):
        # z_i^2 = 1: a variable survives only with odd multiplicity
        counts: dict[int, int] = defaultdict(int)
        for v in m:
            counts[v] += 1
        return tuple(sorted(v for v, k in counts.items() if k % 2))

    @property
    def T(self) -> int:
        return self.num_terms

    def evaluate_spins(self, spins) -> float:
        z = np.asarray(spins, dtype=float)
        return float(sum(c * np.prod(z[list(m)]) if m else c for m, c in self.terms.items()))

    def evaluate(self, bits) -> float:
        """Evaluate at the spin image of a 0/1 assignment."""
        return self.evaluate_spins(1 - 2 * np.asarray(bits, dtype=float))


def eval_poly(poly: _Poly, assignment, n_vars: int | None = None) -> float:
    """Multilinear evaluation at one 0/1 assignment.

    When ``n_vars`` is given the assignment length must equal it.
    """
    x = np.asarray(assignment)
    if n_vars is not None and len(x) != n_vars:
        raise ValueError(f"assignment has {len(x)} entries, layout has {n_vars}")
    if poly.variables and poly.variables[-1] >= len(x):
        raise ValueError(
            f"assignment has {len(x)} entries but polynomial uses variable "
            f"{poly.variables[-1]}"
        )
    if isinstance(poly, SpinPoly):
        return poly.evaluate(x)
    return float(sum(c * all(x[i] for i in m) for m, c in poly.terms.items()))


def eval_poly_batch(poly: _Poly, bits: np.ndarray) -> np.ndarray:
    """Evaluate on every row of a (M, n) 0/1 array."""
    bits = np.asarray(bits)
    out = np.zeros(bits.shape[0])
    if isinstance(poly, SpinPoly):
        vals = 1 - 2 * bits.astype(np.int8)
        for m, c in poly.terms.items():
            out += c * (np.prod(vals[:, list(m)], axis=1) if m else 1)
    else:
        b = bits.astype(bool)
        for m, c in poly.terms.items():
            out += c * (b[:, list(m)].all(axis=1) if m else 1)
    return out


def to_spin(poly: PseudoBooleanPoly) -> SpinPoly:
    """Exact substitution b = (1 - z)/2 with like-term collection."""
    out: dict[Monomial, float] = defaultdict(float)
    for m, c in poly.terms.items():
        w = c / 2 ** len(m)
        for r in range(len(m) + 1):
            sign = -1.0 if r % 2 else 1.0
            for sub in combinations(m, r):
                out[sub] += sign * w
    return SpinPoly(dict(out))


def from_spin(poly: SpinPoly) -> PseudoBooleanPoly:
    """Inverse substitution z = 1 - 2b."""
    out: dict[Monomial, float] = defaultdict(float)
    for m, c in poly.terms.items():
        for r in range(len(m) + 1):
            k = c * (-2.0) ** r
            for sub in combinations(m, r):
                out[sub] += k
    return PseudoBooleanPoly(dict(out))
