"""Mutual information estimates for strings and for prefixes of sequences.

* ``I_t(a:b) = K_t(a) + K_t(b) - K_t(a,b)`` with the pair ``(a,b)`` coded as
  ``header(|a|) a b``;
* the ``i`` bound: ``lognorm(ceil(S)) - 2`` for the truncated sum
  ``S = sum m_t(x|a) m_t(y|b) 2**I_t(x:y)``;
* the sup bound: ``max_x K_t(x) - K_t(x|a) - K_t(x|b)``.

Every ``K_t`` is an upper bound on ``K``, so ``I_t`` has no sign guarantee;
the two bounds are reported as running maxima over stages so that they
never decrease.
"""

from __future__ import annotations

import csv
import json
import logging
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .core import INF, NEG_INF, ZERO, Dyadic, ceil_rational, lenlex_key, lognorm
from .enumerator import DiscreteBound, complexity, discrete_bound
from .randomness import deficiency, ml_test
from .semimeasure import lebesgue

log = logging.getLogger(__name__)

DEFAULT_CAP = 10
INFO_STAGE = 22
SANDWICH_STAGE = 16


# ---------------------------------------------------------------------------
# pairing


def length_header(n: int) -> str:
    """``1^L 0 bin(n)`` with ``L`` the bit length of ``n``; ``"0"`` for ``n == 0``."""
    if n < 0:
        raise ValueError("length must be nonnegative")
    if n == 0:
        return "0"
    b = format(n, "b")
    return "1" * len(b) + "0" + b


def pair_code(a: str, b: str) -> str:
    return length_header(len(a)) + a + b


def decode_pair(z: str) -> tuple[str, str] | None:
    """Inverse of :func:`pair_code`; ``None`` if ``z`` is not a pair code."""
    L = len(z) - len(z.lstrip("1"))
    if L == 0:
        return ("", z[1:]) if z.startswith("0") else None
    if len(z) < 2 * L + 1 or z[L] != "0" or z[L + 1] != "1":
        return None
    n = int(z[L + 1:2 * L + 1], 2)
    rest = z[2 * L + 1:]
    if len(rest) < n:
        return None
    return rest[:n], rest[n:]


# ---------------------------------------------------------------------------
# finite strings


@dataclass(frozen=True)
class InfoReport:
    a: str
    b: str
    stage: int
    K_a: int | float
    K_b: int | float
    K_ab: int | float
    I: int | None
    i_bound: int | float | None = None
    sup_bound: int | float | None = None
    witness: str | None = None

    @property
    def resolved(self) -> bool:
        return self.I is not None

    @property
    def unresolved(self) -> list[str]:
        names = ("K_a", "K_b", "K_ab")
        return [n for n, v in zip(names, (self.K_a, self.K_b, self.K_ab)) if v == INF]


def info_finite(a: str, b: str, bound: DiscreteBound) -> InfoReport:
    """``I_t(a:b)`` with its three components; ``I`` is ``None`` if any is infinite."""
    ka, kb, kab = complexity(bound, a), complexity(bound, b), complexity(bound, pair_code(a, b))
    I = None if INF in (ka, kb, kab) else ka + kb - kab
    return InfoReport(a, b, bound.stage, ka, kb, kab, I)


# ---------------------------------------------------------------------------
# bounds for prefixes of sequences


class ConditionalCache:
    """Conditional bounds ``m_t(.|y)`` computed once per ``(y, stage)``."""

    def __init__(self, stage: int):
        self.stage = stage
        self._cache: dict[tuple[str | None, int], DiscreteBound] = {}
        self.uncond = discrete_bound(stage)
        self._cache[None, stage] = self.uncond

    def _get(self, y: str | None, stage: int | None) -> DiscreteBound:
        stage = self.stage if stage is None else stage
        b = self._cache.get((y, stage))
        if b is None:
            top = self._cache.get((y, self.stage))
            if top is None:
                top = self._cache[y, self.stage] = discrete_bound(self.stage, y)
            b = self._cache[y, stage] = top.restrict(stage)
        return b

    def __call__(self, y: str, stage: int | None = None) -> DiscreteBound:
        return self._get(y, stage)

    def unconditional(self, stage: int | None = None) -> DiscreteBound:
        return self._get(None, stage)


def _i_sum(ma: DiscreteBound, mb: DiscreteBound, uncond: DiscreteBound, cap: int) -> Dyadic:
    total = ZERO
    for z in uncond.mass:
        xy = decode_pair(z)
        if xy is None:
            continue
        x, y = xy
        if len(x) > cap or len(y) > cap:
            continue
        wx, wy = ma[x], mb[y]
        if not wx or not wy:
            continue
        rep = info_finite(x, y, uncond)
        if rep.I is None:
            continue
        total = total + wx * wy * Dyadic.pow2(rep.I)
    return total


def _i_value(total: Dyadic) -> int | float:
    return lognorm(ceil_rational(total)) - 2 if total else NEG_INF


def info_lower_bound(a: str, b: str, cache: ConditionalCache, *, cap: int = DEFAULT_CAP,
                     stage: int | None = None) -> int | float:
    """Running max over stages ``<= stage`` of ``lognorm(ceil(S_s)) - 2``."""
    stage = cache.stage if stage is None else stage
    best: int | float = NEG_INF
    for s in range(1, stage + 1):
        total = _i_sum(cache(a, s), cache(b, s), cache.unconditional(s), cap)
        best = max(best, _i_value(total))
    return best


def _sup_at(ma: DiscreteBound, mb: DiscreteBound, uncond: DiscreteBound):
    best, witness = NEG_INF, None
    for x in sorted(uncond.mass, key=lenlex_key):
        ka, kb = complexity(ma, x), complexity(mb, x)
        if INF in (ka, kb):
            continue
        v = complexity(uncond, x) - ka - kb
        if v > best:
            best, witness = v, x
    return best, witness


def info_sup_bound(a: str, b: str, cache: ConditionalCache, *, stage: int | None = None):
    """Running max over stages of ``max_x K_t(x) - K_t(x|a) - K_t(x|b)``, with the witness."""
    stage = cache.stage if stage is None else stage
    best, witness = NEG_INF, None
    for s in range(1, stage + 1):
        v, w = _sup_at(cache(a, s), cache(b, s), cache.unconditional(s))
        if v > best:
            best, witness = v, w
    return best, witness


def info_report(a: str, b: str, cache: ConditionalCache, *, cap: int = DEFAULT_CAP) -> InfoReport:
    rep = info_finite(a, b, cache.unconditional())
    sup, wit = info_sup_bound(a, b, cache)
    return InfoReport(rep.a, rep.b, rep.stage, rep.K_a, rep.K_b, rep.K_ab, rep.I,
                      info_lower_bound(a, b, cache, cap=cap), sup, wit)


# ---------------------------------------------------------------------------
# corpus


def make_corpus(n: int = 500, max_len: int = 12, seed: int = 0) -> list[tuple[str, str]]:
    """Pairs of strings with lengths uniform on ``0..max_len`` and uniform bits."""
    rng = random.Random(seed)

    def draw() -> str:
        k = rng.randint(0, max_len)
        return "".join(rng.choice("01") for _ in range(k))

    return [(draw(), draw()) for _ in range(n)]


def save_corpus(pairs: Iterable[tuple[str, str]], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["a", "b"])
        w.writerows(pairs)


def load_corpus(path: str | Path) -> list[tuple[str, str]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows and rows[0] == ["a", "b"]:
        rows = rows[1:]
    out = []
    for row in rows:
        a, b = (row + ["", ""])[:2]
        if a.strip("01") or b.strip("01"):
            raise ValueError(f"corpus row {row!r} is not a pair of bit strings")
        out.append((a, b))
    return out


# ---------------------------------------------------------------------------
# conservation


def _drop_last(a: str) -> str | None:
    return a[:-1] if a else None


def _xor_halves(a: str) -> str:
    h = len(a) // 2
    return "".join("1" if p != q else "0" for p, q in zip(a[:h], a[h:2 * h]))


TRANSFORMS: dict[str, Callable[[str], str | None]] = {
    "identity": lambda a: a,
    "drop_last": _drop_last,
    "duplicate": lambda a: a + a,
    "xor_halves": _xor_halves,
}


@dataclass(frozen=True)
class ConservationRecord:
    transform: str
    pair_id: int
    a: str
    b: str
    stage: int
    I_before: int | None
    I_after: int | None
    status: str = "ok"

    @property
    def slack(self) -> int | None:
        """``I(a:b) - I(A(a):b)``; negative values are violations."""
        if self.I_before is None or self.I_after is None:
            return None
        return self.I_before - self.I_after


def conservation_harness(transform: str | Callable[[str], str | None], corpus: Sequence[tuple[str, str]],
                         bound: DiscreteBound, *, name: str | None = None) -> list[ConservationRecord]:
    """One record per corpus pair for ``I(A(a):b) <= I(a:b) + c``."""
    fn = TRANSFORMS[transform] if isinstance(transform, str) else transform
    label = name or (transform if isinstance(transform, str) else getattr(fn, "__name__", "A"))
    out = []
    for i, (a, b) in enumerate(corpus):
        image = fn(a)
        if image is None:
            log.info("%s undefined on pair %d; skipped", label, i)
            out.append(ConservationRecord(label, i, a, b, bound.stage, None, None, "partial"))
            continue
        before = info_finite(a, b, bound).I
        after = info_finite(image, b, bound).I
        status = "ok" if before is not None and after is not None else "unresolved"
        out.append(ConservationRecord(label, i, a, b, bound.stage, before, after, status))
    return out


@dataclass(frozen=True)
class ConservationSummary:
    transform: str
    stage: int
    resolved: int
    total: int
    constant: int | None  # max of I(A(a):b) - I(a:b) over resolved pairs


def summarize(records: Sequence[ConservationRecord], pair_ids: set[int] | None = None) -> ConservationSummary:
    rs = [r for r in records if r.slack is not None and (pair_ids is None or r.pair_id in pair_ids)]
    const = max((-r.slack for r in rs), default=None)
    return ConservationSummary(records[0].transform if records else "", records[0].stage if records else 0,
                               len(rs), len(records), const)


def resolved_ids(records: Sequence[ConservationRecord]) -> set[int]:
    return {r.pair_id for r in records if r.slack is not None}


@dataclass(frozen=True)
class AdjunctionRecord:
    """``I((a,w):b) - I(a:b) - d(w|lambda)`` for one draw of ``w``."""

    pair_id: int
    w: str
    I_base: int | None
    I_joint: int | None
    log_test: int | float
    excess: int | float | None


def adjunction_harness(corpus: Sequence[tuple[str, str]], bound: DiscreteBound, *, draws: int = 100,
                       w_len: int = 2, seed: int = 0) -> list[AdjunctionRecord]:
    """Second inequality with ``w`` uniform on ``w_len`` bits and the test term from the uniform ML test.

    Pairs are drawn from those whose ``I(a:b)`` is resolved at this stage.
    """
    rng = random.Random(seed)
    lam = lebesgue()
    pool = [i for i, (a, b) in enumerate(corpus) if info_finite(a, b, bound).I is not None]
    out = []
    if not pool:
        return out
    for _ in range(draws):
        i = rng.choice(pool)
        a, b = corpus[i]
        w = "".join(rng.choice("01") for _ in range(w_len))
        base = info_finite(a, b, bound).I
        joint = info_finite(pair_code(a, w), b, bound).I
        d = deficiency(ml_test(lam, w, bound)).value
        excess = None if base is None or joint is None else joint - base - d
        out.append(AdjunctionRecord(i, w, base, joint, d, excess))
    return out


def record_rows(records: Iterable) -> list[dict]:
    return [asdict(r) | ({"slack": r.slack} if isinstance(r, ConservationRecord) else {}) for r in records]


def dumps_json(rows: list[dict]) -> str:
    def enc(v):
        if v == INF:
            return "inf"
        if v == NEG_INF:
            return "-inf"
        return v

    return json.dumps([{k: enc(v) for k, v in r.items()} for r in rows], indent=1, sort_keys=True)
