"""Exact dyadic arithmetic, bit-string prefixes and elementary functions.

Prefixes are plain ``str`` objects over the alphabet ``{'0', '1'}``; the
empty string denotes the whole space of infinite sequences.  Everything
here is immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as _cartesian
from numbers import Rational
from typing import Callable, Iterable, Iterator, Sequence

INF = math.inf
NEG_INF = -math.inf

Prefix = str


# ---------------------------------------------------------------------------
# Dyadic rationals


class Dyadic:
    """Nonnegative rational ``numerator / 2**exponent``.

    Values are kept normalized (odd numerator unless the exponent is 0), so
    equality and hashing are value based and agree with :class:`Fraction`.
    """

    __slots__ = ("_num", "_exp")

    def __init__(self, numerator: int = 0, exponent: int = 0):
        if not isinstance(numerator, int) or not isinstance(exponent, int):
            raise TypeError("Dyadic needs integer numerator and exponent")
        if numerator < 0:
            raise ValueError("Dyadic values are nonnegative")
        if exponent < 0:
            numerator <<= -exponent
            exponent = 0
        if numerator == 0:
            exponent = 0
        else:
            tz = (numerator & -numerator).bit_length() - 1
            shift = min(tz, exponent)
            numerator >>= shift
            exponent -= shift
        self._num = numerator
        self._exp = exponent

    @classmethod
    def pow2(cls, k: int) -> "Dyadic":
        """``2**k`` for any integer ``k``."""
        return cls(1 << k, 0) if k >= 0 else cls(1, -k)

    @classmethod
    def from_value(cls, value) -> "Dyadic":
        if isinstance(value, Dyadic):
            return value
        q = Fraction(value)
        den = q.denominator
        if den & (den - 1):
            raise ValueError(f"{value} is not dyadic")
        return cls(q.numerator, den.bit_length() - 1)

    @property
    def numerator(self) -> int:
        return self._num

    @property
    def exponent(self) -> int:
        return self._exp

    def to_fraction(self) -> Fraction:
        return Fraction(self._num, 1 << self._exp)

    def shift(self, k: int) -> "Dyadic":
        """Multiply by ``2**k``."""
        return Dyadic(self._num, self._exp - k)

    def __repr__(self) -> str:
        if self._exp == 0:
            return f"Dyadic({self._num})"
        return f"Dyadic({self._num}/2^{self._exp})"

    def __str__(self) -> str:
        return str(self._num) if self._exp == 0 else f"{self._num}/{1 << self._exp}"

    def __float__(self) -> float:
        return math.ldexp(self._num, -self._exp) if self._num.bit_length() < 1000 else float(self.to_fraction())

    def __bool__(self) -> bool:
        return self._num != 0

    def __hash__(self) -> int:
        return hash(self.to_fraction()) if self._exp else hash(self._num)

    # arithmetic ------------------------------------------------------------

    def _common(self, other: "Dyadic") -> tuple[int, int, int]:
        e = max(self._exp, other._exp)
        return self._num << (e - self._exp), other._num << (e - other._exp), e

    def __add__(self, other):
        if isinstance(other, Dyadic):
            a, b, e = self._common(other)
            return Dyadic(a + b, e)
        if isinstance(other, int):
            return Dyadic(self._num + (other << self._exp), self._exp)
        if isinstance(other, Rational):
            return self.to_fraction() + other
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dyadic):
            a, b, e = self._common(other)
            return Dyadic(a - b, e)
        if isinstance(other, int):
            return Dyadic(self._num - (other << self._exp), self._exp)
        if isinstance(other, Rational):
            return self.to_fraction() - other
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, int):
            return Dyadic((other << self._exp) - self._num, self._exp)
        if isinstance(other, Rational):
            return other - self.to_fraction()
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Dyadic):
            return Dyadic(self._num * other._num, self._exp + other._exp)
        if isinstance(other, int):
            return Dyadic(self._num * other, self._exp)
        if isinstance(other, Rational):
            return self.to_fraction() * other
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self.to_fraction() / Fraction(other.to_fraction() if isinstance(other, Dyadic) else other)

    def __rtruediv__(self, other):
        return Fraction(other) / self.to_fraction()

    # comparisons -----------------------------------------------------------

    def _cmp(self, other) -> int | None:
        if isinstance(other, Dyadic):
            a, b, _ = self._common(other)
        elif isinstance(other, int):
            a, b = self._num, other << self._exp
        elif isinstance(other, Rational):
            a = self._num * other.denominator
            b = other.numerator << self._exp
        elif isinstance(other, float):
            if math.isinf(other):
                return -1 if other > 0 else 1
            return self._cmp(Fraction(other))
        else:
            return None
        return (a > b) - (a < b)

    def __eq__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c == 0

    def __lt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c >= 0


ZERO = Dyadic(0)
ONE = Dyadic(1)


def dyadic_sum(values: Iterable[Dyadic]) -> Dyadic:
    total = ZERO
    for v in values:
        total = total + v
    return total


# ---------------------------------------------------------------------------
# logarithmic norm


def _as_fraction(a) -> Fraction:
    if isinstance(a, Dyadic):
        return a.to_fraction()
    return Fraction(a)


def ceil_log2(a) -> int:
    """Exact ``ceil(log2 a)`` for a positive rational ``a``."""
    q = _as_fraction(a)
    if q <= 0:
        raise ValueError("ceil_log2 of a nonpositive value")
    p, d = q.numerator, q.denominator
    k = p.bit_length() - d.bit_length()
    # smallest k with p <= d * 2**k
    while not _le_pow2(p, d, k):
        k += 1
    while _le_pow2(p, d, k - 1):
        k -= 1
    return k


def _le_pow2(p: int, d: int, k: int) -> bool:
    return p <= (d << k) if k >= 0 else (p << -k) <= d


def lognorm(a) -> int:
    """``|ceil(log2 a) - 1|`` for ``a > 0``.

    Raises ``ValueError("undefined lognorm")`` for zero; callers that need a
    total function map that case to :data:`INF`.
    """
    if _as_fraction(a) == 0:
        raise ValueError("undefined lognorm")
    return abs(ceil_log2(a) - 1)


def lognorm_or_inf(a) -> int | float:
    return INF if _as_fraction(a) == 0 else lognorm(a)


def ceil_rational(a) -> int:
    q = _as_fraction(a)
    return -((-q.numerator) // q.denominator)


# ---------------------------------------------------------------------------
# prefixes


def check_prefix(x: str) -> str:
    if not isinstance(x, str) or x.strip("01"):
        raise ValueError(f"not a bit string: {x!r}")
    return x


def lenlex_key(x: str) -> tuple[int, str]:
    return len(x), x


def strings_of_length(n: int) -> Iterator[str]:
    """All bit strings of length ``n`` in lexicographic order."""
    if n == 0:
        yield ""
        return
    for i in range(1 << n):
        yield format(i, f"0{n}b")


def strings_upto(n: int) -> Iterator[str]:
    """All bit strings of length ``<= n`` in length-lexicographic order."""
    for k in range(n + 1):
        yield from strings_of_length(k)


def proper_prefixes(x: str) -> Iterator[str]:
    for i in range(len(x)):
        yield x[:i]


def is_prefix_free(words: Iterable[str]) -> bool:
    ordered = sorted(set(words))
    return all(not b.startswith(a) for a, b in zip(ordered, ordered[1:]))


def kraft_sum(words: Iterable[str]) -> Dyadic:
    return dyadic_sum(Dyadic(1, len(w)) for w in words)


# ---------------------------------------------------------------------------
# elementary functions


@dataclass(frozen=True, eq=False)
class ElemFn:
    """Rational function of infinite sequences that reads ``depth`` bits.

    ``values[i]`` is the value on the cylinder whose prefix is the binary
    expansion of ``i`` padded to ``depth`` bits.
    """

    depth: int
    values: tuple[Fraction, ...]

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be nonnegative")
        if len(self.values) != 1 << self.depth:
            raise ValueError(f"depth {self.depth} needs {1 << self.depth} values, got {len(self.values)}")
        object.__setattr__(self, "values", tuple(Fraction(v) if not isinstance(v, Fraction) else v for v in self.values))

    @classmethod
    def constant(cls, c, depth: int = 0) -> "ElemFn":
        return cls(depth, (Fraction(c),) * (1 << depth))

    @classmethod
    def one(cls, depth: int = 0) -> "ElemFn":
        return cls.constant(1, depth)

    @classmethod
    def from_table(cls, table: dict[str, object]) -> "ElemFn":
        if not table:
            raise ValueError("empty table")
        depth = len(next(iter(table)))
        vals = []
        for x in strings_of_length(depth):
            if x not in table:
                raise ValueError(f"missing value for {x!r}")
            vals.append(table[x])
        if len(table) != len(vals):
            raise ValueError("table keys must all have the same length")
        return cls(depth, tuple(vals))

    @classmethod
    def from_function(cls, depth: int, fn: Callable[[str], object]) -> "ElemFn":
        return cls(depth, tuple(fn(x) for x in strings_of_length(depth)))

    @classmethod
    def indicator(cls, prefix: str, depth: int | None = None) -> "ElemFn":
        """Indicator of the cylinder of ``prefix``."""
        check_prefix(prefix)
        depth = len(prefix) if depth is None else depth
        if depth < len(prefix):
            raise ValueError("depth shallower than the cylinder")
        return cls.from_function(depth, lambda x: 1 if x.startswith(prefix) else 0)

    def __call__(self, x: str) -> Fraction:
        if len(x) < self.depth:
            raise ValueError(f"need at least {self.depth} bits, got {len(x)}")
        return self.values[int(x[: self.depth], 2) if self.depth else 0]

    def table(self) -> dict[str, Fraction]:
        return dict(zip(strings_of_length(self.depth), self.values))

    def lift(self, new_depth: int) -> "ElemFn":
        if new_depth < self.depth:
            raise ValueError("cannot coarsen exactly")
        k = new_depth - self.depth
        if k == 0:
            return self
        return ElemFn(new_depth, tuple(v for v in self.values for _ in range(1 << k)))

    def reduced(self) -> "ElemFn":
        """The same function on the shallowest table that represents it."""
        f = self
        while f.depth > 0:
            vals = f.values
            halves = [(vals[2 * i], vals[2 * i + 1]) for i in range(len(vals) // 2)]
            if any(a != b for a, b in halves):
                break
            f = ElemFn(f.depth - 1, tuple(a for a, _ in halves))
        return f

    def min_on(self, prefix: str) -> Fraction:
        """Minimum over the cylinder of ``prefix``."""
        if len(prefix) >= self.depth:
            return self(prefix)
        k = self.depth - len(prefix)
        start = (int(prefix, 2) if prefix else 0) << k
        return min(self.values[start : start + (1 << k)])

    def max_on(self, prefix: str) -> Fraction:
        if len(prefix) >= self.depth:
            return self(prefix)
        k = self.depth - len(prefix)
        start = (int(prefix, 2) if prefix else 0) << k
        return max(self.values[start : start + (1 << k)])

    def is_nonnegative(self) -> bool:
        return all(v >= 0 for v in self.values)

    def map(self, fn: Callable[[Fraction], object]) -> "ElemFn":
        return ElemFn(self.depth, tuple(fn(v) for v in self.values))

    def __eq__(self, other):
        if not isinstance(other, ElemFn):
            return NotImplemented
        d = max(self.depth, other.depth)
        return self.lift(d).values == other.lift(d).values

    def __hash__(self):
        r = self.reduced()
        return hash((r.depth, r.values))

    def __add__(self, other: "ElemFn") -> "ElemFn":
        return pointwise("add", self, other)

    def __sub__(self, other: "ElemFn") -> "ElemFn":
        return pointwise("sub", self, other)

    def __mul__(self, other: "ElemFn") -> "ElemFn":
        return pointwise("mul", self, other)

    def __le__(self, other: "ElemFn") -> bool:
        d = max(self.depth, other.depth)
        return all(a <= b for a, b in zip(self.lift(d).values, other.lift(d).values))


_OPS: dict[str, Callable[[Fraction, Fraction], Fraction]] = {
    "min": min,
    "max": max,
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
}


def pointwise(op: str, f: ElemFn, g: ElemFn) -> ElemFn:
    """Exact pointwise ``op`` of ``f`` and ``g`` at their common depth."""
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown pointwise op {op!r}") from None
    d = max(f.depth, g.depth)
    return ElemFn(d, tuple(fn(a, b) for a, b in zip(f.lift(d).values, g.lift(d).values)))


def elemfn_lift(f: ElemFn, new_depth: int) -> ElemFn:
    return f.lift(new_depth)


def scale(f: ElemFn, c) -> ElemFn:
    c = Fraction(c)
    return ElemFn(f.depth, tuple(c * v for v in f.values))


def elemfn_pointwise(op: str, f: ElemFn, g: ElemFn | None = None, c=None) -> ElemFn:
    """Front door matching the four lattice operations; ``scale`` uses ``c``."""
    if op == "scale":
        if c is None:
            raise ValueError("scale needs a factor")
        return scale(f, c)
    if g is None:
        raise ValueError(f"{op} needs two functions")
    return pointwise(op, f, g)


@dataclass(frozen=True)
class Lattice:
    """Functions that depend only on the first ``depth`` bits."""

    depth: int

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("lattice depth must be nonnegative")

    def cells(self) -> list[str]:
        return list(strings_of_length(self.depth))

    def contains(self, f: ElemFn) -> bool:
        return f.reduced().depth <= self.depth

    def functions(self, values: Sequence[object]) -> Iterator[ElemFn]:
        """Every function on this lattice taking values in ``values``."""
        for combo in _cartesian(values, repeat=1 << self.depth):
            yield ElemFn(self.depth, combo)
