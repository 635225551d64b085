"""Random set-expression trees for property tests.

Trees stay inside one universe: integer trees, rational trees drawn from
either {I, Qpos} or {I, Q} (the two non-unit rationals label integers
differently and cannot be combined), and unions of small products.
"""

import random

from hypothesis import strategies as st

from partwhole.expr import Atom, BinOp, Finite

BOOLEAN_OPS = ("union", "inter", "minus")


def int_leaf(rng: random.Random):
    r = rng.random()
    if r < 0.2:
        size = rng.randint(1, 5)
        low = -30 if rng.random() < 0.3 else 1
        return Finite(tuple(rng.randint(low, 60) for _ in range(size)))
    name = rng.choice(["N", "N0", "Z", "E", "O", "P", "M", "S"])
    if name == "M":
        return Atom("M", rng.randint(1, 6))
    if name == "S":
        return Atom("S", rng.randint(2, 3))
    return Atom(name)


def int_tree(rng: random.Random, depth: int):
    if depth <= 0 or rng.random() < 0.3:
        return int_leaf(rng)
    return BinOp(rng.choice(BOOLEAN_OPS), int_tree(rng, depth - 1), int_tree(rng, depth - 1))


def rat_tree(rng: random.Random, depth: int, names):
    if depth <= 0 or rng.random() < 0.3:
        return Atom(rng.choice(names))
    return BinOp(rng.choice(BOOLEAN_OPS), rat_tree(rng, depth - 1, names),
                 rat_tree(rng, depth - 1, names))


def pair_tree(rng: random.Random, depth: int, right_rational: bool):
    if depth <= 2 or rng.random() < 0.5:
        left = int_tree(rng, min(depth - 1, 1))
        right = Atom("I") if right_rational else int_tree(rng, min(depth - 1, 1))
        return BinOp("product", left, right)
    return BinOp(rng.choice(BOOLEAN_OPS), pair_tree(rng, depth - 1, right_rational),
                 pair_tree(rng, depth - 1, right_rational))


def random_tree(rng: random.Random, depth: int = 4):
    r = rng.random()
    if r < 0.45:
        return int_tree(rng, depth)
    if r < 0.8:
        return rat_tree(rng, depth, rng.choice([("I", "Qpos"), ("I", "Q")]))
    return pair_tree(rng, depth, rng.random() < 0.3)


def depth_of(expr) -> int:
    if isinstance(expr, BinOp):
        return 1 + max(depth_of(expr.left), depth_of(expr.right))
    return 0


# hypothesis: any well-typed tree, for parser round trips
_atoms = st.one_of(
    st.sampled_from(["N", "N0", "Z", "E", "O", "P"]).map(Atom),
    st.builds(Atom, st.sampled_from(["M", "S"]), st.integers(1, 12)),
    st.lists(st.integers(-99, 99), min_size=1, max_size=4).map(lambda xs: Finite(tuple(xs))),
)
_rationals = st.sampled_from(["I", "Qpos", "Q"]).map(Atom)


def _grow(children):
    return st.builds(BinOp, st.sampled_from(BOOLEAN_OPS), children, children)


integer_exprs = st.recursive(_atoms, _grow, max_leaves=8)
rational_exprs = st.recursive(_rationals, _grow, max_leaves=6)
product_exprs = st.recursive(
    st.builds(BinOp, st.just("product"), integer_exprs, integer_exprs), _grow, max_leaves=3)
set_exprs = st.one_of(integer_exprs, rational_exprs, product_exprs)
