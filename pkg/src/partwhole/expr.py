"""Set expressions and their universes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple, Union

from .errors import UniverseError

BINARY_OPS = ("union", "inter", "minus", "product")
ATOM_NAMES = ("N", "N0", "Z", "Q", "Qpos", "I", "E", "O", "P", "M", "S")


@dataclass(frozen=True)
class Universe:
    kind: str  # "naturals" | "integers" | "rationals" | "pairs"
    parts: Tuple["Universe", ...] = ()

    def __str__(self):
        if self.kind == "pairs":
            return f"pairs({self.parts[0]}, {self.parts[1]})"
        return self.kind


NAT = Universe("naturals")
INT = Universe("integers")
RAT = Universe("rationals")


def pair(a: Universe, b: Universe) -> Universe:
    return Universe("pairs", (a, b))


def unify(op: str, a: Universe, b: Universe) -> Universe:
    """Common universe for a boolean operation.

    Positive integers sit inside the integers with the same labels, so those
    two unify; every other mismatch is an error.
    """
    if a == b:
        return a
    if {a.kind, b.kind} == {"naturals", "integers"}:
        return INT
    if a.kind == b.kind == "pairs":
        try:
            return pair(unify(op, a.parts[0], b.parts[0]), unify(op, a.parts[1], b.parts[1]))
        except UniverseError:
            pass
    raise UniverseError(op, a, b)


class SetExpr:
    """Base class of the expression tree."""

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Atom(SetExpr):
    name: str
    arg: Optional[int] = None

    def __post_init__(self):
        if self.name not in ATOM_NAMES:
            raise ValueError(f"unknown atom {self.name}")
        if (self.name in ("M", "S")) != (self.arg is not None):
            raise ValueError(f"atom {self.name} arity mismatch")
        if self.arg is not None and self.arg < 1:
            raise ValueError(f"{self.name}({self.arg}) needs a positive parameter")


@dataclass(frozen=True)
class Finite(SetExpr):
    elements: Tuple[int, ...]

    def __post_init__(self):
        if not self.elements:
            raise ValueError("finite literal must be non-empty")
        object.__setattr__(self, "elements", tuple(sorted(set(self.elements))))


@dataclass(frozen=True)
class BinOp(SetExpr):
    op: str
    left: SetExpr
    right: SetExpr

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ValueError(f"unknown operator {self.op}")


Expr = Union[Atom, Finite, BinOp]

_ATOM_UNIVERSE = {
    "N": NAT, "E": NAT, "O": NAT, "P": NAT, "M": NAT, "S": NAT,
    "Z": INT, "N0": INT,
    "I": RAT, "Qpos": RAT, "Q": RAT,
}


def universe_of(expr: SetExpr) -> Universe:
    if isinstance(expr, Atom):
        return _ATOM_UNIVERSE[expr.name]
    if isinstance(expr, Finite):
        return NAT if all(e > 0 for e in expr.elements) else INT
    left = universe_of(expr.left)
    right = universe_of(expr.right)
    if expr.op == "product":
        return pair(left, right)
    return unify(expr.op, left, right)


_LEVEL = {"union": 1, "minus": 1, "inter": 2, "product": 3}


def _level(e: SetExpr) -> int:
    return _LEVEL[e.op] if isinstance(e, BinOp) else 4


def to_text(expr: SetExpr) -> str:
    """Render with the fewest parentheses the grammar needs."""
    if isinstance(expr, Atom):
        return expr.name if expr.arg is None else f"{expr.name}({expr.arg})"
    if isinstance(expr, Finite):
        return "{" + ",".join(str(e) for e in expr.elements) + "}"
    lvl = _LEVEL[expr.op]
    left = to_text(expr.left)
    right = to_text(expr.right)
    if _level(expr.left) < lvl:
        left = f"({left})"
    if _level(expr.right) <= lvl:
        right = f"({right})"
    word = "x" if expr.op == "product" else expr.op
    return f"{left} {word} {right}"
