"""Exception hierarchy.

Every error carries the process exit code the command-line front end
reports for it.
"""

from __future__ import annotations


class PartWholeError(Exception):
    exit_code = 2


class ParseError(PartWholeError):
    exit_code = 1

    def __init__(self, message: str, column: int):
        super().__init__(f"column {column}: {message}")
        self.column = column


class UniverseError(PartWholeError, TypeError):
    """Operands of a set operation live in different universes."""

    def __init__(self, op: str, left, right):
        super().__init__(f"cannot {op} {left} with {right}")
        self.op = op
        self.left = left
        self.right = right


class NotAMemberError(PartWholeError, KeyError):
    def __init__(self, element, set_name: str):
        super().__init__(f"{element!r} is not a member of {set_name}")
        self.element = element

    def __str__(self):
        return self.args[0]


class NonCanonicalError(PartWholeError):
    """Two sets disagree on the label of a shared element, or a set
    without a canonical arrangement was fed to a union-type operation."""


class OverlapError(PartWholeError):
    def __init__(self, element, first, second):
        super().__init__(
            f"family members overlap: {element!r} lies in cells {first} and {second}")
        self.element = element


class OutOfDomainError(PartWholeError, ValueError):
    pass


class SequenceOverflowError(PartWholeError, OverflowError):
    exit_code = 3

    def __init__(self, index: int, detail: str = ""):
        msg = f"value at index {index} exceeds the unsigned 64-bit range"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.index = index


class UndefinedDifferenceError(PartWholeError, ArithmeticError):
    exit_code = 4


class ResourceLimitError(PartWholeError):
    exit_code = 5


class CertificateError(PartWholeError):
    """An envelope could not be certified (audit failure or search cap)."""
    exit_code = 5


class VerifyMismatch(PartWholeError):
    exit_code = 6
