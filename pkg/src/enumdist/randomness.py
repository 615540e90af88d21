"""Randomness tests and deficiencies.

For a computable measure ``mu`` the stage-``t`` test is

    T(x) = sum over i <= |x| of m_t(x[:i]) / mu(x[:i])

and the deficiency of a test value is ``lognorm(ceil(T)) - 2``.  For
semimeasures the test goes through a deterministic operator: ``mu`` is
first regularized to ``U_mu(lambda)`` via a library of operators with
prefix dispatch, then

    t_E(c) = sup { v : v * U_mu(1_c) <= T_lambda }

on the cells ``c`` of a lattice, with ``v`` running over a dyadic grid, and
the deficiency of ``phi`` is read off ``phi_E(t_E)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .core import (
    INF,
    NEG_INF,
    ONE,
    ZERO,
    Dyadic,
    ElemFn,
    Lattice,
    ceil_rational,
    lenlex_key,
    lognorm,
    lognorm_or_inf,
    strings_of_length,
)
from .enumerator import DiscreteBound, ProgramRecord, _stage_sweep, complexity, schedule
from .machine import MachineConfig, explore
from .semimeasure import (
    LebesgueTable,
    OperatorSpec,
    SemimeasureTable,
    _lcp,
    coarse_grain,
    constant_operator,
    flip_operator,
    identity_operator,
    lebesgue,
    mean,
    push_distribution,
    shift_operator,
)

log = logging.getLogger(__name__)

DEFAULT_GRID_EXP = 6


@dataclass(frozen=True)
class TestValue:
    """Lower bound of a test at ``prefix`` after ``stage``; ``INF`` when unbounded."""

    value: Fraction | float
    stage: int
    prefix: str = ""


@dataclass(frozen=True)
class Deficiency:
    value: int | float
    prefix: str = ""
    stage: int = 0


# ---------------------------------------------------------------------------
# tests for computable measures


def ml_test(mu: SemimeasureTable, x: str, bound: DiscreteBound) -> TestValue:
    """``sum_{i<=|x|} m_t(x[:i]) / mu(x[:i])``; ``INF`` if ``mu`` vanishes on a prefix."""
    total = Fraction(0)
    for i in range(len(x) + 1):
        w = mu.mass(x[:i])
        if not w:
            return TestValue(INF, bound.stage, x)
        m = bound[x[:i]]
        if m:
            total += Fraction(m.to_fraction()) / Fraction(w.to_fraction())
    return TestValue(total, bound.stage, x)


def deficiency(T: TestValue) -> Deficiency:
    """``lognorm(ceil(T)) - 2``; ``+inf`` for an unbounded test, ``-inf`` at ``T == 0``."""
    if T.value == INF:
        return Deficiency(INF, T.prefix, T.stage)
    if T.value <= 0:
        return Deficiency(NEG_INF, T.prefix, T.stage)
    return Deficiency(lognorm(ceil_rational(T.value)) - 2, T.prefix, T.stage)


def gap_form(mu: SemimeasureTable, x: str, bound: DiscreteBound) -> int | float:
    """``max_i (lognorm mu(x[:i]) - K_t(x[:i]))`` over ``i <= |x|``."""
    best: int | float = NEG_INF
    for i in range(len(x) + 1):
        w = mu.mass(x[:i])
        if not w:
            return INF
        k = complexity(bound, x[:i])
        if k != INF:
            best = max(best, lognorm(w) - k)
    return best


class LambdaTest:
    """The stage-``t`` uniform-measure test ``T(a) = sum_i 2**i m_t(a[:i])`` on sequences.

    ``m_t`` has finite support, so ``T`` is elementary; :meth:`min_on` gives its
    exact minimum over a cylinder.
    """

    def __init__(self, bound: DiscreteBound):
        self.bound = bound
        self.stage = bound.stage
        # integer terms scaled by 2**stage
        self._exp = bound.stage
        self._term = {x: (v.numerator << (self._exp - v.exponent)) << len(x) for x, v in bound.mass.items()}
        nodes = {x[:k] for x in self._term for k in range(len(x) + 1)}
        tail: dict[str, int] = {}
        for z in sorted(nodes, key=lambda s: (-len(s), s)):
            tail[z] = self._term.get(z, 0) + min(tail.get(z + "0", 0), tail.get(z + "1", 0))
        self._tail = tail

    def _above(self, x: str) -> int:
        term = self._term
        return sum(term.get(x[:i], 0) for i in range(len(x)))

    def term(self, x: str) -> Dyadic:
        return Dyadic(self._term.get(x, 0), self._exp)

    def prefix_sum(self, x: str) -> Dyadic:
        """``sum_{i <= |x|} 2**i m_t(x[:i])``."""
        return Dyadic(self._above(x) + self._term.get(x, 0), self._exp)

    def min_on(self, x: str) -> Dyadic:
        """Minimum of the full stage-``t`` test over the cylinder of ``x``."""
        return Dyadic(self._above(x) + self._tail.get(x, 0), self._exp)

    def table(self, depth: int) -> ElemFn:
        """Depth-truncated test as an elementary function."""
        return ElemFn.from_function(depth, lambda x: self.prefix_sum(x).to_fraction())


def lambda_mean(bound: DiscreteBound, depth: int) -> Dyadic:
    """Exact uniform mean of the test truncated at ``depth``."""
    lt = LambdaTest(bound)
    total = ZERO
    for x in strings_of_length(depth):
        total = total + lt.prefix_sum(x)
    return Dyadic(total.numerator, total.exponent + depth)


# ---------------------------------------------------------------------------
# surrogate tests on a lattice


def dyadic_grid(g: int = DEFAULT_GRID_EXP) -> tuple[Dyadic, ...]:
    """``{0} | {2**-g, ..., 2**g}``."""
    return (ZERO,) + tuple(Dyadic(1, k) for k in range(g, 0, -1)) + tuple(Dyadic(1 << k) for k in range(g + 1))


def _grid_floor(grid: Sequence, bound) -> Dyadic | Fraction | int:
    best = None
    for v in grid:
        if (bound is None or v <= bound) and (best is None or v > best):
            best = v
    return ZERO if best is None else best


def _cell_weights(A: OperatorSpec, depth: int) -> dict[str, list[tuple[str, Fraction | Dyadic]]]:
    """For every depth-``depth`` cell ``c``: the leaves with ``A(1_c) > 0`` and their weights."""
    cells: dict[str, list] = {}
    if A.kind == "pct":
        for leaf, outs in A.leaves.items():
            top = _lcp(outs)
            if len(top) >= depth:
                cells.setdefault(top[:depth], []).append((leaf, ONE))
    else:
        for leaf, table in A.leaves.items():
            for c, w in table.level(depth).items():
                cells.setdefault(c, []).append((leaf, w))
    return cells


def surrogate_test(A: OperatorSpec, E: Lattice, grid: Sequence, tlam: LambdaTest) -> ElemFn:
    """Pointwise sup of the grid functions ``f`` on ``E`` with ``A(f) <= T_lambda``.

    ``A`` is monotone and positively homogeneous, so ``f`` passes iff every
    ``f(c) * 1_c`` does: the sup is computed cell by cell.
    """
    if E.depth > A.out_depth:
        raise ValueError(f"lattice depth {E.depth} exceeds operator output depth {A.out_depth}")
    grid = list(grid)
    if not grid:
        return ElemFn.constant(0, E.depth)
    weights = _cell_weights(A, E.depth)
    values = []
    for c in strings_of_length(E.depth):
        bound = None
        for leaf, w in weights.get(c, ()):
            b = tlam.min_on(leaf).to_fraction()
            if w != 1:
                b = b / Fraction(w.to_fraction() if isinstance(w, Dyadic) else w)
            bound = b if bound is None or b < bound else bound
        v = _grid_floor(grid, bound)
        values.append(v.to_fraction() if isinstance(v, Dyadic) else Fraction(v))
    return ElemFn(E.depth, tuple(values))


# ---------------------------------------------------------------------------
# regularization


def dispatch_codes(k: int) -> list[str]:
    """Prefix codes ``0, 10, 110, ..., 1^(k-1)`` (empty code for a single operator)."""
    if k <= 0:
        return []
    if k == 1:
        return [""]
    return ["1" * i + "0" for i in range(k - 1)] + ["1" * (k - 1)]


def dispatch(ops: Sequence[OperatorSpec], out_depth: int, name: str = "dispatch") -> OperatorSpec:
    """Operator reading a dispatch code ``i`` and then running ``ops[i]``."""
    leaves: dict[str, frozenset[str]] = {}
    for code, A in zip(dispatch_codes(len(ops)), ops):
        if A.kind != "pct":
            raise ValueError("the operator library holds PCT duals only")
        for leaf, outs in A.leaves.items():
            leaves[code + leaf] = frozenset(o[:out_depth] for o in outs)
    return OperatorSpec("pct", leaves, out_depth, name)


@dataclass(frozen=True)
class Eviction:
    operator: str
    node: str
    pushed: Dyadic
    bound: Dyadic


@dataclass
class RegularizedSM:
    source: SemimeasureTable
    operator: OperatorSpec
    result: SemimeasureTable
    library: list[OperatorSpec]
    codes: list[str]
    evicted: list[Eviction] = field(default_factory=list)
    factor2_violations: list[str] = field(default_factory=list)
    stage: int | None = None

    @property
    def regular(self) -> bool:
        return self.source.generator is not None


def audit(A: OperatorSpec, mu: SemimeasureTable) -> Eviction | None:
    """First node where ``A(lambda)`` exceeds ``mu`` (None if the certificate holds)."""
    pushed = push_distribution(A, lebesgue(max(A.in_depth, 1)))
    depth = min(pushed.depth, mu.depth)
    for x, v in pushed.items():
        if len(x) <= depth and v > mu.mass(x):
            return Eviction(A.name or repr(A), x, v, mu.mass(x))
    return None


def regularize(mu: SemimeasureTable, library: Sequence[OperatorSpec], *, stage: int | None = None) -> RegularizedSM:
    """Combine the audited library into one operator ``U`` and push ``lambda`` through it.

    A generator of ``mu`` (if recorded) is placed first, under code ``0``,
    so that ``mu <= 2 U(lambda)``.  Operators whose push-forward of
    ``lambda`` exceeds ``mu`` anywhere are evicted and logged.
    """
    ops = list(library)
    if mu.generator is not None:
        ops = [mu.generator] + [A for A in ops if A is not mu.generator]
    kept, evicted = [], []
    for A in ops:
        ev = audit(A, mu)
        if ev is None:
            kept.append(A)
        else:
            log.info("evicting %s: %s pushes %s > %s", ev.operator, ev.node or "<root>", ev.pushed, ev.bound)
            evicted.append(ev)
    if not kept:
        kept = [constant_operator("")]
    U = dispatch(kept, mu.depth)
    lam = lebesgue(max(U.in_depth, 1))
    result = push_distribution(U, lam)
    result = SemimeasureTable(mu.depth, dict(result.items()), check=False, generator=U)
    bad = []
    if mu.generator is not None:
        for x, v in mu.items():
            if v > result.mass(x) * 2:
                bad.append(x)
    return RegularizedSM(mu, U, result, kept, dispatch_codes(len(kept)), evicted, bad, stage)


# ---------------------------------------------------------------------------
# the monotone machine as an operator


def monotone_operator(stage: int, depth: int = 16, *, workers: int = 1) -> OperatorSpec:
    """Stage-``t`` monotone machine as a PCT: each explored program maps to its output cylinder."""
    max_len, budget = schedule(stage)
    if stage == 0:
        return OperatorSpec("pct", {"": frozenset({""})}, depth, "monotone@0")
    ex = explore(max_len, budget, MachineConfig(), out_depth=depth, workers=workers)
    leaves = {p: frozenset({o.output[:depth]}) for p, o in ex.leaves}
    return OperatorSpec("pct", leaves, depth, f"monotone@{stage}")


def operator_library(stage: int, depth: int = 12, *, workers: int = 1) -> list[OperatorSpec]:
    """The shipped library: identity, flip, shift, constant zero, and the monotone machine."""
    return [
        identity_operator(depth),
        flip_operator(depth),
        shift_operator(depth),
        constant_operator("0" * depth),
        monotone_operator(stage, depth, workers=workers),
    ]


def regular_semimeasure(A: OperatorSpec) -> SemimeasureTable:
    """``A(lambda)`` with ``A`` recorded as its generator."""
    return push_distribution(A, lebesgue(max(A.in_depth, 1)))


# ---------------------------------------------------------------------------
# deficiency relative to a semimeasure


def deficiency_semimeasure(phi: SemimeasureTable, mu: SemimeasureTable, E: Lattice, bound: DiscreteBound,
                           library: Sequence[OperatorSpec] = (), *, grid_exp: int = DEFAULT_GRID_EXP,
                           reg: RegularizedSM | None = None) -> Deficiency:
    """``lognorm(ceil(phi_E(t_E))) - 2`` with ``t_E`` the surrogate test of ``U_mu``."""
    if reg is None:
        reg = regularize(mu, library, stage=bound.stage)
    t = surrogate_test(reg.operator, E, dyadic_grid(grid_exp), LambdaTest(bound))
    phiE = coarse_grain(phi, E)
    T = mean(phiE, t)
    return deficiency(TestValue(T, bound.stage, ""))
