"""Sizes of countable sets as sequences compared along the cofinite filter."""

from .envelope import EnvelopeCertificate, EnvelopeTerm, crossover, env_compare
from .errors import (
    CertificateError,
    NonCanonicalError,
    NotAMemberError,
    OutOfDomainError,
    OverlapError,
    ParseError,
    PartWholeError,
    ResourceLimitError,
    SequenceOverflowError,
    UndefinedDifferenceError,
    UniverseError,
    VerifyMismatch,
)
from .expr import Atom, BinOp, Finite, SetExpr, Universe, universe_of
from .quasipoly import QuasiPolynomial, qp_add, qp_compare, qp_eval, qp_mul, qp_sub
from .sequences import (
    IntSequence,
    SizeSequence,
    add,
    alpha,
    bolzano_tail,
    compare,
    constant,
    from_characteristic,
    mul,
    prefix,
    sub,
)
from .sets import (
    CalculableSet,
    arrangement,
    atom,
    block,
    build,
    characteristic,
    compare_sets,
    family_union,
    finite_subset,
    inter,
    label,
    minus,
    prime_pi,
    product,
    size,
    subset_of_product,
    totient,
    union,
)
from .verdict import ComparisonVerdict, Relation

__version__ = "0.1.0"
