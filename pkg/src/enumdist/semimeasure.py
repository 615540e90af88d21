"""Measures and semimeasures on finite prefix trees, and operators on them.

A :class:`SemimeasureTable` stores cylinder masses up to a fixed depth.  The
mean of a nonnegative elementary function under a semimeasure is the inner
(Choquet) integral along the tree,

    mu(f) = sum over nodes v of  mu(v) * (min f on v  -  min f on parent(v)),

which is linear for measures, superadditive (concave) for semimeasures, and
gives ``mu(1) = mu(empty)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .core import (
    ONE,
    ZERO,
    Dyadic,
    ElemFn,
    Lattice,
    check_prefix,
    kraft_sum,
    lenlex_key,
    strings_of_length,
    strings_upto,
)


class SemimeasureTable:
    """Cylinder masses up to ``depth``; absent nodes have mass zero.

    ``generator`` optionally records a deterministic operator ``A`` with
    ``A(lambda) == self`` (a regular semimeasure).
    """

    def __init__(self, depth: int, masses: Mapping[str, Dyadic] | None = None, *, check: bool = True,
                 generator: "OperatorSpec | None" = None):
        if depth < 0:
            raise ValueError("depth must be nonnegative")
        self.depth = depth
        self.generator = generator
        clean = {}
        for x, v in (masses or {}).items():
            if len(x) > depth:
                raise ValueError(f"node {x!r} deeper than table depth {depth}")
            v = Dyadic.from_value(v)
            if v:
                clean[x] = v
        self._m = clean
        if check:
            bad = self.violations()
            if bad:
                raise ValueError(f"not a semimeasure at {bad[:5]}")

    # access --------------------------------------------------------------

    def mass(self, x: str) -> Dyadic:
        if len(x) > self.depth:
            raise ValueError(f"{x!r} is deeper than the table ({self.depth})")
        return self._m.get(x, ZERO)

    __getitem__ = mass

    def items(self) -> list[tuple[str, Dyadic]]:
        """Nonzero nodes in length-lexicographic order."""
        return sorted(self._m.items(), key=lambda kv: lenlex_key(kv[0]))

    def support(self) -> Iterable[str]:
        return self._m.keys()

    def level(self, n: int) -> dict[str, Dyadic]:
        return {x: v for x, v in self._m.items() if len(x) == n}

    def __eq__(self, other):
        if not isinstance(other, SemimeasureTable):
            return NotImplemented
        if self.depth != other.depth:
            return False
        return dict(self.items()) == dict(other.items())

    def __hash__(self):
        return hash((self.depth, tuple(self.items())))

    def __repr__(self) -> str:
        head = ", ".join(f"{x or 'ε'}:{v}" for x, v in self.items()[:6])
        more = "" if len(self._m) <= 6 else ", ..."
        return f"SemimeasureTable(depth={self.depth}, {{{head}{more}}})"

    # structure -----------------------------------------------------------

    def violations(self) -> list[str]:
        """Nodes where ``mu(x) >= mu(x0) + mu(x1)`` fails (and ``'<root>'`` if ``mu(ε) > 1``)."""
        bad = []
        if self.mass("") > 1:
            bad.append("<root>")
        parents = {x[:-1] for x in self.support() if x}
        for p in sorted(parents, key=lenlex_key):
            if self.mass(p) < self.mass(p + "0") + self.mass(p + "1"):
                bad.append(p)
        return bad

    def is_semimeasure(self) -> bool:
        return not self.violations()

    def is_measure(self, upto: int | None = None) -> bool:
        """Additive at every internal node of depth ``< upto`` (default: table depth)."""
        upto = self.depth if upto is None else min(upto, self.depth)
        for x, v in self._m.items():
            if len(x) < upto and v != self.mass(x + "0") + self.mass(x + "1"):
                return False
        return True

    def truncate(self, depth: int) -> "SemimeasureTable":
        if depth > self.depth:
            raise ValueError("cannot deepen a table by truncation")
        return SemimeasureTable(depth, {x: v for x, v in self._m.items() if len(x) <= depth}, check=False)

    def deficiency_at(self, x: str) -> Dyadic:
        """``mu(x) - mu(x0) - mu(x1)``: mass lost at ``x``."""
        return self.mass(x) - self.mass(x + "0") - self.mass(x + "1")


class LebesgueTable(SemimeasureTable):
    """The uniform measure ``lambda(x) = 2**-|x|`` (masses computed on demand)."""

    def __init__(self, depth: int = 64):
        self.depth = depth
        self.generator = None
        self._m = {}

    def mass(self, x: str) -> Dyadic:
        if len(x) > self.depth:
            raise ValueError(f"{x!r} is deeper than the table ({self.depth})")
        return Dyadic(1, len(x))

    def items(self) -> list[tuple[str, Dyadic]]:
        if self.depth > 20:
            raise ValueError("refusing to list a lambda table deeper than 20")
        return [(x, Dyadic(1, len(x))) for x in strings_upto(self.depth)]

    def support(self):
        return (x for x, _ in self.items())

    def level(self, n: int) -> dict[str, Dyadic]:
        return {x: Dyadic(1, n) for x in strings_of_length(n)}

    def violations(self) -> list[str]:
        return []

    def is_measure(self, upto: int | None = None) -> bool:
        return True

    def truncate(self, depth: int) -> "LebesgueTable":
        return LebesgueTable(depth)

    def __eq__(self, other):
        if isinstance(other, LebesgueTable):
            return self.depth == other.depth
        return SemimeasureTable.__eq__(self, other)

    __hash__ = SemimeasureTable.__hash__

    def __repr__(self) -> str:
        return f"LebesgueTable(depth={self.depth})"


def lebesgue(depth: int = 64) -> LebesgueTable:
    return LebesgueTable(depth)


def from_leaves(leaves: Mapping[str, Dyadic], depth: int | None = None) -> SemimeasureTable:
    """Additive table built up from masses on the deepest level."""
    if not leaves:
        return SemimeasureTable(depth or 0)
    n = len(next(iter(leaves)))
    if any(len(x) != n for x in leaves):
        raise ValueError("leaves must share one length")
    masses: dict[str, Dyadic] = {}
    for x, v in leaves.items():
        v = Dyadic.from_value(v)
        for k in range(n + 1):
            masses[x[:k]] = masses.get(x[:k], ZERO) + v
    return SemimeasureTable(n if depth is None else depth, masses)


def point_mass(sequence: str, depth: int | None = None) -> SemimeasureTable:
    """Unit mass on every prefix of ``sequence`` (a Dirac measure to that depth)."""
    check_prefix(sequence)
    depth = len(sequence) if depth is None else depth
    if depth > len(sequence):
        raise ValueError("sequence shorter than the requested depth")
    return SemimeasureTable(depth, {sequence[:k]: ONE for k in range(depth + 1)})


# ---------------------------------------------------------------------------
# means


def choquet(mu: SemimeasureTable, f: ElemFn) -> Fraction:
    """Inner integral of a nonnegative ``f`` along the prefix tree of ``mu``."""
    total = Fraction(0)
    # min of f over each node, bottom-up
    level = list(f.values)
    mins_by_depth = [None] * (f.depth + 1)
    mins_by_depth[f.depth] = level
    for d in range(f.depth - 1, -1, -1):
        prev = mins_by_depth[d + 1]
        mins_by_depth[d] = [min(prev[2 * i], prev[2 * i + 1]) for i in range(1 << d)]
    total += mu.mass("") * mins_by_depth[0][0]
    for d in range(1, f.depth + 1):
        cur, up = mins_by_depth[d], mins_by_depth[d - 1]
        for i, m in enumerate(cur):
            inc = m - up[i >> 1]
            if inc:
                x = format(i, f"0{d}b")
                w = mu.mass(x)
                if w:
                    total += w * inc
    return total


def mean(mu: SemimeasureTable, f: ElemFn) -> Fraction:
    """Mean of ``f`` under ``mu``.

    Measures accept any sign and integrate linearly.  Semimeasures only
    accept nonnegative ``f``; the value is the inner integral.
    """
    if f.depth > mu.depth:
        raise ValueError(f"function depth {f.depth} exceeds table depth {mu.depth}")
    if mu.is_measure(f.depth):
        return sum((mu.mass(x) * v for x, v in zip(strings_of_length(f.depth), f.values) if v),
                   Fraction(0))
    if not f.is_nonnegative():
        raise ValueError("semimeasure means are defined for nonnegative functions only")
    return choquet(mu, f)


# ---------------------------------------------------------------------------
# products


class PairTable:
    """Product ``mu ⊗ phi`` on pairs of prefixes."""

    def __init__(self, mu: SemimeasureTable, phi: SemimeasureTable):
        self.mu = mu
        self.phi = phi
        self.depths = (mu.depth, phi.depth)

    def mass(self, x: str, y: str):
        return self.mu.mass(x) * self.phi.mass(y)

    def items(self) -> Iterator[tuple[tuple[str, str], Dyadic]]:
        for x, a in self.mu.items():
            for y, b in self.phi.items():
                yield (x, y), a * b

    def row_sum(self, x: str, ylen: int) -> Dyadic:
        """Sum of ``mass(x, y)`` over all ``y`` of length ``ylen``."""
        total = ZERO
        for y, b in self.phi.level(ylen).items():
            total = total + self.mu.mass(x) * b
        return total

    def violations(self) -> list[tuple[str, str]]:
        bad = []
        for (x, y), v in self.items():
            if len(x) < self.depths[0] and v < self.mass(x + "0", y) + self.mass(x + "1", y):
                bad.append((x, y))
            if len(y) < self.depths[1] and v < self.mass(x, y + "0") + self.mass(x, y + "1"):
                bad.append((x, y))
        return bad

    def is_measure(self) -> bool:
        for (x, y), v in self.items():
            if len(x) < self.depths[0] and v != self.mass(x + "0", y) + self.mass(x + "1", y):
                return False
            if len(y) < self.depths[1] and v != self.mass(x, y + "0") + self.mass(x, y + "1"):
                return False
        return True

    def mean(self, fn, d1: int, d2: int) -> Fraction:
        """Iterated mean ``mu(x -> phi(fn(x, .)))``.

        ``fn(x, y)`` is read on ``d1``-bit ``x`` and ``d2``-bit ``y``.
        """
        inner = ElemFn.from_function(
            d1, lambda x: mean(self.phi, ElemFn.from_function(d2, lambda y: fn(x, y)))
        )
        return mean(self.mu, inner)


def product(mu: SemimeasureTable, phi: SemimeasureTable) -> PairTable:
    return PairTable(mu, phi)


# ---------------------------------------------------------------------------
# coarse graining


def coarse_grain(mu: SemimeasureTable, E: Lattice) -> SemimeasureTable:
    """Largest measure on the depth-``E`` lattice dominated by ``mu``.

    Keeps ``mu`` on the lattice cells, sums upward, and leaves every node
    deeper than the lattice at zero.
    """
    if E.depth > mu.depth:
        raise ValueError(f"lattice depth {E.depth} exceeds table depth {mu.depth}")
    masses: dict[str, Dyadic] = {}
    for c, v in mu.level(E.depth).items():
        for k in range(E.depth + 1):
            masses[c[:k]] = masses.get(c[:k], ZERO) + v
    return SemimeasureTable(mu.depth, masses, check=False)


# ---------------------------------------------------------------------------
# operators


def _lcp(words: Iterable[str]) -> str:
    words = list(words)
    first, last = min(words), max(words)
    i = 0
    while i < len(first) and i < len(last) and first[i] == last[i]:
        i += 1
    return first[:i]


def _cover_ok(leaves: Iterable[str]) -> bool:
    ordered = sorted(leaves)
    if any(b.startswith(a) for a, b in zip(ordered, ordered[1:])):
        return False
    return kraft_sum(ordered) == 1


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    """Finite-depth operator given on a complete prefix-free cover of inputs.

    ``kind == "pct"``: each leaf maps to a nonempty set of output cylinders
    (prefixes of length ``<= out_depth``); the dual sends ``f`` to the
    minimum of ``f`` over that set.  ``kind == "concave"``: each leaf maps
    to a :class:`SemimeasureTable` and the dual takes means.
    """

    kind: str
    leaves: Mapping[str, object]
    out_depth: int
    name: str = ""
    _lookup_lens: tuple[int, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in ("pct", "concave"):
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if not self.leaves or not _cover_ok(self.leaves):
            raise ValueError("input leaves must form a complete prefix-free cover")
        for leaf, val in self.leaves.items():
            if self.kind == "pct":
                if not val:
                    raise ValueError(f"empty output set at {leaf!r}")
                if any(len(c) > self.out_depth for c in val):
                    raise ValueError(f"output cylinder deeper than out_depth at {leaf!r}")
            elif not isinstance(val, SemimeasureTable) or val.depth < self.out_depth:
                raise ValueError(f"concave leaf {leaf!r} needs a table of depth >= {self.out_depth}")
        object.__setattr__(self, "_lookup_lens", tuple(sorted({len(x) for x in self.leaves})))

    # constructors --------------------------------------------------------

    @classmethod
    def pct(cls, family: Mapping[str, Iterable[str]], out_depth: int, name: str = "") -> "OperatorSpec":
        """Build from a family of output sets, possibly including internal inputs.

        Any input prefix given together with one of its ancestors must map
        to a subset of the ancestor's set: the family has to be nested.
        """
        fam = {x: frozenset(check_prefix(c) for c in s) for x, s in family.items()}
        keys = sorted(fam, key=lenlex_key)
        for x in keys:
            for k in range(len(x)):
                anc = x[:k]
                if anc in fam and not _cylinders_within(fam[x], fam[anc]):
                    raise ValueError(f"output family not nested: {x!r} escapes {anc!r}")
        leaves = {x: s for x, s in fam.items() if not any(y != x and y.startswith(x) for y in fam)}
        return cls("pct", leaves, out_depth, name)

    @classmethod
    def concave(cls, leaves: Mapping[str, SemimeasureTable], out_depth: int, name: str = "") -> "OperatorSpec":
        return cls("concave", dict(leaves), out_depth, name)

    # structure -----------------------------------------------------------

    @property
    def in_depth(self) -> int:
        return self._lookup_lens[-1]

    def leaf_of(self, alpha: str) -> str:
        for k in self._lookup_lens:
            if k > len(alpha):
                break
            if alpha[:k] in self.leaves:
                return alpha[:k]
        raise KeyError(f"{alpha!r} is shorter than every leaf covering it")

    def output_set(self, x: str) -> frozenset[str]:
        """Output cylinders for inputs in ``[x]``: the leaf set, or the union below ``x``."""
        if self.kind != "pct":
            raise TypeError("output sets exist for PCT duals only")
        for k in self._lookup_lens:
            if k > len(x):
                break
            if x[:k] in self.leaves:
                return self.leaves[x[:k]]
        out: set[str] = set()
        for leaf, s in self.leaves.items():
            if leaf.startswith(x):
                out |= s
        return frozenset(out)

    def is_nested(self) -> bool:
        for x in {leaf[:k] for leaf in self.leaves for k in range(len(leaf))}:
            parent = self.output_set(x)
            for b in "01":
                if not _cylinders_within(self.output_set(x + b), parent):
                    return False
        return True

    def leaf_value(self, leaf: str, f: ElemFn) -> Fraction:
        val = self.leaves[leaf]
        if self.kind == "pct":
            return min(f.min_on(c) for c in val)
        return mean(val, f)


def _cylinders_within(inner: Iterable[str], outer: Iterable[str]) -> bool:
    outer = list(outer)
    return all(any(c.startswith(o) for o in outer) for c in inner)


def apply_operator(A: OperatorSpec, f: ElemFn) -> ElemFn:
    """Dual action ``A(f)`` as an elementary function of the input."""
    if f.depth > A.out_depth:
        raise ValueError(f"function depth {f.depth} exceeds operator output depth {A.out_depth}")
    cache: dict[str, Fraction] = {}

    def value(alpha: str) -> Fraction:
        leaf = A.leaf_of(alpha)
        if leaf not in cache:
            cache[leaf] = A.leaf_value(leaf, f)
        return cache[leaf]

    return ElemFn.from_function(A.in_depth, value)


def indicator_weights(A: OperatorSpec, y: str) -> dict[str, Fraction | Dyadic]:
    """``A(1_[y])`` per input leaf (only nonzero entries)."""
    out = {}
    for leaf, val in A.leaves.items():
        if A.kind == "pct":
            if all(c.startswith(y) for c in val):
                out[leaf] = ONE
        else:
            w = val.mass(y) if len(y) <= val.depth else ZERO
            if w:
                out[leaf] = w
    return out


def _leaf_choquet(phi: SemimeasureTable, weights: Mapping[str, object], leaves: Iterable[str]) -> Fraction:
    """Inner integral of a function constant on each leaf cylinder."""
    leaves = list(leaves)
    mins: dict[str, Fraction] = {}
    for leaf in leaves:
        v = weights.get(leaf, 0)
        v = v.to_fraction() if isinstance(v, Dyadic) else Fraction(v)
        for k in range(len(leaf) + 1):
            node = leaf[:k]
            mins[node] = v if node not in mins else min(mins[node], v)
    total = Fraction(0)
    for node, m in mins.items():
        inc = m - (mins[node[:-1]] if node else 0)
        if inc:
            total += phi.mass(node).to_fraction() * inc
    return total


def push_distribution(A: OperatorSpec, phi: SemimeasureTable) -> SemimeasureTable:
    """Output distribution ``mu(f) = phi(A(f))`` tabulated on cylinders.

    When ``phi`` is the uniform measure and ``A`` a PCT, the result records
    ``A`` as its generator.
    """
    if A.in_depth > phi.depth:
        raise ValueError(f"operator input depth {A.in_depth} exceeds table depth {phi.depth}")
    masses: dict[str, object] = {}
    if phi.is_measure(A.in_depth) and A.kind == "pct":
        # integer accumulation at a common exponent
        weights = [(leaf, phi.mass(leaf)) for leaf in A.leaves]
        exp = max((w.exponent for _, w in weights), default=0)
        acc: dict[str, int] = {}
        for leaf, w in weights:
            if not w:
                continue
            n = w.numerator << (exp - w.exponent)
            outs = A.leaves[leaf]
            top = (next(iter(outs)) if len(outs) == 1 else _lcp(outs))[: A.out_depth]
            for k in range(len(top) + 1):
                acc[top[:k]] = acc.get(top[:k], 0) + n
        masses = {y: Dyadic(n, exp) for y, n in acc.items()}
    elif phi.is_measure(A.in_depth):
        for leaf, val in A.leaves.items():
            w = phi.mass(leaf)
            if not w:
                continue
            for y, v in val.items():
                if len(y) <= A.out_depth:
                    masses[y] = masses.get(y, ZERO) + w * v
    else:
        for y in strings_upto(A.out_depth):
            v = _leaf_choquet(phi, indicator_weights(A, y), A.leaves)
            if v:
                masses[y] = v
    masses = {y: Dyadic.from_value(v) for y, v in masses.items()}
    gen = A if isinstance(phi, LebesgueTable) and A.kind == "pct" else None
    return SemimeasureTable(A.out_depth, masses, check=False, generator=gen)


# ---------------------------------------------------------------------------
# a few stock operators


def identity_operator(depth: int) -> OperatorSpec:
    return OperatorSpec("pct", {x: frozenset({x}) for x in strings_of_length(depth)}, depth, "identity")


def flip_operator(depth: int) -> OperatorSpec:
    flip = str.maketrans("01", "10")
    return OperatorSpec("pct", {x: frozenset({x.translate(flip)}) for x in strings_of_length(depth)}, depth, "flip")


def shift_operator(depth: int) -> OperatorSpec:
    """Drops the first input bit."""
    return OperatorSpec("pct", {x: frozenset({x[1:]}) for x in strings_of_length(depth + 1)}, depth, "shift")


def constant_operator(target: str) -> OperatorSpec:
    """Sends every input to the cylinder of ``target``."""
    return OperatorSpec("pct", {"": frozenset({target})}, len(target), f"const:{target}")


# ---------------------------------------------------------------------------
# from dual action back to output sets


def realize_deterministic(action, in_depth: int, out_depth: int, name: str = "realized") -> OperatorSpec:
    """Recover output sets from a dual action ``f -> A(f)`` on depth-``out_depth`` functions.

    For each input cell ``a`` the set is ``{b : A(1 - 1_b)(a) != 1}``, the
    cells whose removal is noticed.  Raises ``ValueError`` when a set comes
    out empty.  The caller checks that the recovered operator reproduces
    ``action``.
    """
    one = ElemFn.one(out_depth)
    family: dict[str, frozenset[str]] = {}
    probes = {b: action(one - ElemFn.indicator(b, out_depth)) for b in strings_of_length(out_depth)}
    for a in strings_of_length(in_depth):
        s = frozenset(b for b, g in probes.items() if g(a) != 1)
        if not s:
            raise ValueError(f"no output cell for input {a!r}")
        family[a] = s
    return OperatorSpec.pct(family, out_depth, name)
