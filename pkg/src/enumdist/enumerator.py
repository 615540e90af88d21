"""Stage-indexed lower bounds on the universal distributions.

Stage ``t`` runs every program of length ``<= t`` for ``t**2`` steps (stage
0 does no work).  From that sweep:

* ``m_t(x)``  = sum of ``2**-|p|`` over programs halting with output ``x``;
* ``M_t(x)``  = sum of ``2**-|p|`` over minimal programs whose monotone
  output extends ``x`` (tabulated to a fixed depth);
* ``K_t = lognorm(m_t)`` and ``KM_t = lognorm(M_t)``.

All values only ever improve with the stage; none claims to be the limit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

from .core import ZERO, Dyadic, ceil_log2, lenlex_key, lognorm_or_inf
from .machine import MachineConfig, Variant, explore
from .semimeasure import SemimeasureTable

log = logging.getLogger(__name__)

DEFAULT_DEPTH = 16
DEFAULT_TMAX = 18


def schedule(t: int) -> tuple[int, int]:
    """(maximum program length, step budget) for stage ``t``."""
    if t < 0:
        raise ValueError("stage must be nonnegative")
    return t, t * t


@dataclass(frozen=True, order=True)
class ProgramRecord:
    program: str
    output: str
    steps: int

    def sort_key(self):
        return lenlex_key(self.program)


@dataclass(frozen=True)
class DiscreteBound:
    """``m_t(x | y)`` for one stage; ``y is None`` for the unconditional machine."""

    stage: int
    mass: Mapping[str, Dyadic]
    y: str | None = None
    records: tuple[ProgramRecord, ...] = ()

    def __getitem__(self, x: str) -> Dyadic:
        return self.mass.get(x, ZERO)

    def kraft(self) -> Dyadic:
        total = ZERO
        for v in self.mass.values():
            total = total + v
        return total

    def support(self) -> list[str]:
        return sorted(self.mass, key=lenlex_key)

    def restrict(self, stage: int) -> "DiscreteBound":
        """The bound an earlier stage would have produced (derived from the records)."""
        if stage > self.stage:
            raise ValueError("cannot restrict to a later stage")
        if stage == self.stage:
            return self
        max_len, budget = schedule(stage)
        keep = tuple(r for r in self.records if len(r.program) <= max_len and r.steps <= budget)
        if stage == 0:
            keep = ()
        return DiscreteBound(stage, _masses(keep, stage), self.y, keep)


@dataclass(frozen=True)
class ContinuousBound:
    """``M_t`` tabulated to ``tree.depth``."""

    stage: int
    tree: SemimeasureTable

    def __getitem__(self, x: str) -> Dyadic:
        return self.tree.mass(x)


def _masses(records: Sequence[ProgramRecord], stage: int) -> dict[str, Dyadic]:
    scaled: dict[str, int] = {}
    for r in records:
        scaled[r.output] = scaled.get(r.output, 0) + (1 << (stage - len(r.program)))
    return {x: Dyadic(v, stage) for x, v in scaled.items()}


def _cfg(y: str | None) -> MachineConfig:
    return MachineConfig(Variant.CONDITIONAL, y) if y is not None else MachineConfig()


@lru_cache(maxsize=256)
def _stage_sweep(t: int, y: str | None, depth: int, workers: int):
    max_len, budget = schedule(t)
    ex = explore(max_len, budget, _cfg(y), out_depth=depth, workers=workers)
    records = tuple(ProgramRecord(p, o.output, o.steps) for p, o in ex.leaves if o.halted)
    return records, ex.monotone


def discrete_bound(t: int, y: str | None = None, *, workers: int = 1, depth: int = DEFAULT_DEPTH) -> DiscreteBound:
    """``m_t(. | y)`` computed from scratch."""
    if t == 0:
        return DiscreteBound(0, {}, y, ())
    # the conditional machine only feeds discrete bounds: skip the monotone tally
    records, _ = _stage_sweep(t, y, depth if y is None else 0, workers)
    return DiscreteBound(t, _masses(records, t), y, records)


def continuous_bound(t: int, depth: int = DEFAULT_DEPTH, *, workers: int = 1) -> ContinuousBound:
    """``M_t`` to ``depth`` computed from scratch."""
    if t == 0:
        return ContinuousBound(0, SemimeasureTable(depth))
    _, mono = _stage_sweep(t, None, depth, workers)
    return ContinuousBound(t, SemimeasureTable(depth, {x: Dyadic(v, t) for x, v in mono.items()}, check=False))


def advance_discrete(b: DiscreteBound, *, workers: int = 1) -> DiscreteBound:
    nxt = discrete_bound(b.stage + 1, b.y, workers=workers)
    _progress(nxt.stage, f"m_t: {len(nxt.mass)} strings, kraft={float(nxt.kraft()):.6f}")
    return nxt


def advance_continuous(b: ContinuousBound, *, workers: int = 1) -> ContinuousBound:
    nxt = continuous_bound(b.stage + 1, b.tree.depth, workers=workers)
    _progress(nxt.stage, f"M_t: {len(list(nxt.tree.support()))} nodes")
    return nxt


def _progress(stage: int, msg: str) -> None:
    log.info("stage %d: %s", stage, msg)


def complexity(b: DiscreteBound | ContinuousBound, x: str) -> int | float:
    """``K_t(x)`` or ``KM_t(x)``: lognorm of the current mass, ``INF`` at zero."""
    return lognorm_or_inf(b[x])


def stage_sweep(tmax: int, y: str | None = None, *, depth: int = DEFAULT_DEPTH, workers: int = 1):
    """Yield ``(DiscreteBound, ContinuousBound)`` for stages ``0..tmax``."""
    d, c = discrete_bound(0, y), continuous_bound(0, depth)
    yield d, c
    for _ in range(tmax):
        d = advance_discrete(d, workers=workers)
        c = advance_continuous(c, workers=workers) if y is None else c
        yield d, c


# ---------------------------------------------------------------------------
# mixtures


def mixture_weight(i: int) -> Dyadic:
    """Dyadic stand-in for ``1/2i^2``: ``2**-(2*ceil(log2(i+2)))``.  Sums to 1/2."""
    if i < 0:
        raise ValueError("index must be nonnegative")
    return Dyadic(1, 2 * ceil_log2(i + 2))


def mixture_semimeasure(components: Sequence[tuple[Dyadic, SemimeasureTable]]) -> SemimeasureTable:
    """Weighted sum of semimeasure tables (weights must sum to at most 1)."""
    if not components:
        raise ValueError("empty mixture")
    total_w = ZERO
    for w, _ in components:
        total_w = total_w + Dyadic.from_value(w)
    if total_w > 1:
        raise ValueError(f"mixture weights sum to {total_w} > 1")
    depth = min(t.depth for _, t in components)
    masses: dict[str, Dyadic] = {}
    for w, table in components:
        w = Dyadic.from_value(w)
        if not table.is_semimeasure():
            raise ValueError("mixture component is not a semimeasure")
        for x, v in table.truncate(depth).items():
            masses[x] = masses.get(x, ZERO) + w * v
    return SemimeasureTable(depth, masses, check=False)
