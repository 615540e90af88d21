"""Binary snapshots of stage bounds.

Layout (all integers big-endian)::

    magic      b"EDSN"
    version    u16
    cfg hash   32 bytes (sha256 of the machine config JSON)
    stage      u32
    depth      u16
    y          u8 flag, then string
    records    u32 count, then (program, output, steps u32) in length-lex order of program
    discrete   u32 count, then (string, mass) in length-lex order
    continuous u8 flag, then u32 count, then (string, mass) in length-lex order
    trailer    sha256 of everything above

A string is ``u16 length`` followed by ASCII '0'/'1'; a mass is
``numerator u64, exponent u16``.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

from .core import Dyadic, lenlex_key
from .enumerator import (
    DEFAULT_DEPTH,
    ContinuousBound,
    DiscreteBound,
    ProgramRecord,
    continuous_bound,
    discrete_bound,
)
from .machine import MachineConfig, Variant
from .semimeasure import SemimeasureTable

MAGIC = b"EDSN"
FORMAT_VERSION = 1
_U64 = 1 << 64


class SnapshotError(Exception):
    """Unreadable, corrupted or mismatched snapshot."""


@dataclass(frozen=True)
class Snapshot:
    cfg: MachineConfig
    stage: int
    depth: int
    discrete: DiscreteBound
    continuous: ContinuousBound | None

    @property
    def y(self) -> str | None:
        return self.discrete.y


def cfg_for(y: str | None) -> MachineConfig:
    return MachineConfig(Variant.CONDITIONAL, y) if y is not None else MachineConfig()


def compute(stage: int, y: str | None = None, depth: int = DEFAULT_DEPTH, *, workers: int = 1) -> Snapshot:
    d = discrete_bound(stage, y, workers=workers, depth=depth)
    c = continuous_bound(stage, depth, workers=workers) if y is None else None
    return Snapshot(cfg_for(y), stage, depth, d, c)


def advance(snap: Snapshot, *, workers: int = 1) -> Snapshot:
    """Next stage from a loaded snapshot.

    The sweep for stage ``t+1`` runs afresh (step budgets change between
    stages, so partial runs are not reusable); the loaded bounds are then
    checked to be dominated by the new ones.
    """
    nxt = compute(snap.stage + 1, snap.y, snap.depth, workers=workers)
    for x, v in snap.discrete.mass.items():
        if nxt.discrete[x] < v:
            raise SnapshotError(f"snapshot mass for {x!r} exceeds the next stage")
    if snap.continuous is not None:
        for x, v in snap.continuous.tree.items():
            if nxt.continuous[x] < v:
                raise SnapshotError(f"snapshot tree mass for {x!r} exceeds the next stage")
    return nxt


def _pack_str(x: str) -> bytes:
    return struct.pack(">H", len(x)) + x.encode("ascii")


def _pack_mass(v: Dyadic) -> bytes:
    if v.numerator >= _U64 or v.exponent >= 1 << 16:
        raise SnapshotError(f"mass {v} does not fit the fixed-width encoding")
    return struct.pack(">QH", v.numerator, v.exponent)


def _pack_masses(pairs) -> bytes:
    pairs = sorted(pairs, key=lambda kv: lenlex_key(kv[0]))
    out = [struct.pack(">I", len(pairs))]
    for x, v in pairs:
        out.append(_pack_str(x))
        out.append(_pack_mass(v))
    return b"".join(out)


def dumps(snap: Snapshot) -> bytes:
    body = [MAGIC, struct.pack(">H", FORMAT_VERSION), snap.cfg.digest(), struct.pack(">IH", snap.stage, snap.depth)]
    if snap.y is None:
        body.append(b"\x00")
    else:
        body.append(b"\x01" + _pack_str(snap.y))
    recs = sorted(snap.discrete.records, key=lambda r: lenlex_key(r.program))
    body.append(struct.pack(">I", len(recs)))
    for r in recs:
        body += [_pack_str(r.program), _pack_str(r.output), struct.pack(">I", r.steps)]
    body.append(_pack_masses(snap.discrete.mass.items()))
    if snap.continuous is None:
        body.append(b"\x00")
    else:
        body.append(b"\x01" + _pack_masses(snap.continuous.tree.items()))
    blob = b"".join(body)
    return blob + hashlib.sha256(blob).digest()


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise SnapshotError("truncated snapshot")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self) -> str:
        (n,) = self.unpack(">H")
        s = self.take(n).decode("ascii")
        if s.strip("01"):
            raise SnapshotError("non-binary string in snapshot")
        return s

    def mass(self) -> Dyadic:
        num, exp = self.unpack(">QH")
        return Dyadic(num, exp)

    def masses(self) -> dict[str, Dyadic]:
        (n,) = self.unpack(">I")
        out = {}
        for _ in range(n):
            x = self.string()
            out[x] = self.mass()
        return out


def loads(data: bytes, expect_cfg: MachineConfig | None = None) -> Snapshot:
    if len(data) < 36 or data[:4] != MAGIC:
        raise SnapshotError("not a snapshot (bad magic)")
    blob, trailer = data[:-32], data[-32:]
    if hashlib.sha256(blob).digest() != trailer:
        raise SnapshotError("checksum mismatch: snapshot is corrupted")
    rd = _Reader(blob)
    rd.take(4)
    (version,) = rd.unpack(">H")
    if version != FORMAT_VERSION:
        raise SnapshotError(f"unsupported snapshot version {version} (expected {FORMAT_VERSION})")
    digest = rd.take(32)
    stage, depth = rd.unpack(">IH")
    (flag,) = rd.unpack(">B")
    y = rd.string() if flag else None
    cfg = cfg_for(y)
    if digest != cfg.digest() or (expect_cfg is not None and expect_cfg.digest() != digest):
        raise SnapshotError("machine config hash mismatch (different instruction set or y tape)")
    (n,) = rd.unpack(">I")
    records = []
    for _ in range(n):
        p = rd.string()
        o = rd.string()
        (steps,) = rd.unpack(">I")
        records.append(ProgramRecord(p, o, steps))
    mass = rd.masses()
    (flag,) = rd.unpack(">B")
    cont = None
    if flag:
        cont = ContinuousBound(stage, SemimeasureTable(depth, rd.masses(), check=False))
    if rd.pos != len(blob):
        raise SnapshotError("trailing bytes in snapshot")
    return Snapshot(cfg, stage, depth, DiscreteBound(stage, mass, y, tuple(records)), cont)


def save(snap: Snapshot, path: str | Path) -> bytes:
    data = dumps(snap)
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(path)
    return data


def load(path: str | Path, expect_cfg: MachineConfig | None = None) -> Snapshot:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise SnapshotError(f"cannot read snapshot: {exc}") from exc
    return loads(data, expect_cfg)


def snapshot_hash(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
