"""Random finite tables and operators shared by the property tests."""

import random
from fractions import Fraction

from enumdist.core import ElemFn, strings_of_length, strings_upto
from enumdist.semimeasure import OperatorSpec, SemimeasureTable


def random_cover(rng: random.Random, max_depth: int, p_split: float = 0.6) -> list[str]:
    """Complete prefix-free cover of depth <= max_depth."""
    out = []

    def grow(x):
        if len(x) < max_depth and rng.random() < p_split:
            grow(x + "0")
            grow(x + "1")
        else:
            out.append(x)

    grow("")
    return out


def random_pct(rng: random.Random, in_depth: int = 3, out_depth: int = 3) -> OperatorSpec:
    cyl = list(strings_upto(out_depth))
    leaves = {}
    for leaf in random_cover(rng, in_depth):
        k = rng.randint(1, 3)
        leaves[leaf] = frozenset(rng.choice(cyl) for _ in range(k))
    return OperatorSpec("pct", leaves, out_depth, "random")


def random_semimeasure(rng: random.Random, depth: int, denom: int = 64, measure: bool = False) -> SemimeasureTable:
    """Top-down random split of mass, losing some at each node unless ``measure``."""
    masses = {"": Fraction(rng.randint(denom // 2, denom), denom) if not measure else Fraction(1)}
    for x in strings_upto(depth - 1):
        v = masses.get(x, Fraction(0))
        keep = v if measure else v * Fraction(rng.randint(0, 4), 4)
        # split on a dyadic grid so values stay dyadic
        units = int(keep * denom * 2 ** len(x))
        a = rng.randint(0, units)
        scale = Fraction(1, denom * 2 ** len(x))
        masses[x + "0"] = a * scale
        masses[x + "1"] = (units - a) * scale
    return SemimeasureTable(depth, masses)


def random_concave(rng: random.Random, in_depth: int = 2, out_depth: int = 3) -> OperatorSpec:
    leaves = {leaf: random_semimeasure(rng, out_depth) for leaf in random_cover(rng, in_depth)}
    return OperatorSpec.concave(leaves, out_depth, "random-concave")


def random_fn(rng: random.Random, depth: int, values=(-2, -1, 0, 1, 2)) -> ElemFn:
    return ElemFn(depth, tuple(Fraction(rng.choice(values)) for _ in range(1 << depth)))


def all_cells(depth):
    return list(strings_of_length(depth))
