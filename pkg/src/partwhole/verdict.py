"""Comparison verdicts under the cofinite (Frechet) filter."""

from __future__ import annotations

import operator
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Tuple


class Relation(Enum):
    EQUAL = "Equal"
    LESS = "Less"
    GREATER = "Greater"
    LESS_EQ = "LessEq"
    GREATER_EQ = "GreaterEq"
    INCOMPARABLE = "Incomparable"
    UNKNOWN = "Unknown"

    def __str__(self):
        return self.value

    @property
    def pointwise(self):
        """The per-index predicate that holds beyond the witness."""
        return _POINTWISE.get(self)

    def flipped(self) -> "Relation":
        return _FLIP.get(self, self)

    @classmethod
    def from_signs(cls, signs) -> "Relation":
        """Combine eventual signs of ``a - b`` over residue classes."""
        s = set(signs)
        if s == {0}:
            return cls.EQUAL
        if s == {-1}:
            return cls.LESS
        if s == {1}:
            return cls.GREATER
        if -1 in s and 1 in s:
            return cls.INCOMPARABLE
        return cls.LESS_EQ if -1 in s else cls.GREATER_EQ


_POINTWISE = {
    Relation.EQUAL: operator.eq,
    Relation.LESS: operator.lt,
    Relation.GREATER: operator.gt,
    Relation.LESS_EQ: operator.le,
    Relation.GREATER_EQ: operator.ge,
}

_FLIP = {
    Relation.LESS: Relation.GREATER,
    Relation.GREATER: Relation.LESS,
    Relation.LESS_EQ: Relation.GREATER_EQ,
    Relation.GREATER_EQ: Relation.LESS_EQ,
}

SIGN_WORDS = {-1: "less", 0: "equal", 1: "greater"}


def residue_name(r: int, period: int) -> str:
    if period == 2:
        return "even" if r == 0 else "odd"
    return f"n≡{r} (mod {period})"


@dataclass(frozen=True)
class ComparisonVerdict:
    """Outcome of comparing two size sequences.

    ``witness_m`` means: for every ``n > witness_m`` the pointwise form of
    ``relation`` holds.  ``classes`` lists ``(residue, sign of a - b)`` for
    verdicts decided on residue classes; ``proof`` holds the two residues
    with opposite strict order when the relation is Incomparable.
    """

    relation: Relation
    witness_m: Optional[int] = None
    checked_to: Optional[int] = None
    method: str = ""
    period: Optional[int] = None
    classes: Optional[Tuple[Tuple[int, int], ...]] = None
    proof: Optional[Tuple[int, int]] = None
    certificate: Optional[dict] = field(default=None, compare=False)
    observation: Optional[str] = None

    def __post_init__(self):
        decisive = self.relation in _POINTWISE
        if decisive and self.witness_m is None:
            raise ValueError(f"{self.relation} verdict needs a witness")
        if self.relation is Relation.INCOMPARABLE and self.proof is None:
            raise ValueError("Incomparable verdict needs a proof handle")

    @property
    def is_definite(self) -> bool:
        return self.relation is not Relation.UNKNOWN

    def holds_at(self, x: int, y: int) -> bool:
        return self.relation.pointwise(x, y)

    def flipped(self) -> "ComparisonVerdict":
        """The same verdict with the operands swapped."""
        classes = None
        if self.classes is not None:
            classes = tuple((r, -s) for r, s in self.classes)
        proof = None
        if self.proof is not None:
            proof = (self.proof[1], self.proof[0])
        return replace(self, relation=self.relation.flipped(), classes=classes, proof=proof)

    def with_witness(self, m: int) -> "ComparisonVerdict":
        return replace(self, witness_m=m)

    def class_breakdown(self) -> str:
        if not self.classes:
            return ""
        parts = [f"{residue_name(r, self.period)}: {SIGN_WORDS[s]}" for r, s in self.classes]
        return "{" + ", ".join(parts) + "}"

    def justification(self) -> str:
        if self.relation is Relation.UNKNOWN:
            text = f"checked to n={self.checked_to}"
            if self.observation:
                text += f"; {self.observation}"
            return text
        if self.method == "symbolic":
            if self.period and self.period > 1:
                return "residue classes " + self.class_breakdown()
            return "quasi-polynomial normal forms"
        if self.certificate and "text" in self.certificate:
            return self.certificate["text"]
        return self.observation or self.method

    def summary(self) -> str:
        if self.relation is Relation.UNKNOWN:
            return f"Unknown ({self.justification()})"
        head = str(self.relation)
        if self.witness_m is not None:
            head += f", witness m={self.witness_m}"
        return f"{head}: {self.justification()}"

    def __str__(self):
        return self.summary()
