"""Per-term decomposition of a Fréchet distance against a horizontal segment."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .geometry import TOL, Point

TIE = TOL


class Term(str, Enum):
    UP = "UP"  # start point to p
    VQ = "VQ"  # end point to q
    HL = "HL"  # Hausdorff, vertices left of p
    HR = "HR"  # Hausdorff, vertices right of q
    HM = "HM"  # Hausdorff, vertical offsets
    BWD = "BWD"  # worst backward pair
    SPLIT_U = "SPLIT_U"  # first interior vertex to its split point
    SPLIT_V = "SPLIT_V"  # last interior vertex to its split point

    def __repr__(self) -> str:
        return self.value


@dataclass(frozen=True)
class TermValue:
    value: float
    points: tuple[Point, ...] = ()
    labels: tuple[object, ...] = ()


@dataclass(frozen=True)
class FrechetBreakdown:
    value: float
    terms: Mapping[Term, TermValue] = field(default_factory=dict)
    attaining: frozenset = frozenset()

    @classmethod
    def from_terms(cls, terms: Mapping[Term, TermValue], value: float | None = None,
                   tie: float = TIE) -> "FrechetBreakdown":
        top = max((t.value for t in terms.values()), default=0.0)
        if value is None:
            value = top
        attaining = frozenset(k for k, t in terms.items() if top - t.value <= tie)
        return cls(value=value, terms=dict(terms), attaining=attaining)

    def witness(self, term: Term) -> TermValue:
        return self.terms[term]

    def attaining_within(self, tol: float) -> frozenset:
        top = max((t.value for t in self.terms.values()), default=0.0)
        return frozenset(k for k, t in self.terms.items() if top - t.value <= tol)
