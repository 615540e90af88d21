"""A small self-delimiting bit VM.

One instruction set serves three machine variants: the prefix machine
(output counts only on HALT), the monotone machine (output emitted so far,
halted or not) and the conditional prefix machine (an extra read-only tape
``y``).  ``docs/isa.md`` is the normative instruction table; ``OPCODES``
below must agree with it.

Programs are read on demand from a single bit stream.  Instructions are
decoded lazily: when the program counter runs past the last decoded
instruction the next one is decoded from the stream.  Data reads (READ)
consume from the same stream, so a program is exactly the bits consumed.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterator

from .core import Dyadic, kraft_sum, lenlex_key

ISA_VERSION = "bitvm-1"
STACK_CAP = 32
DEFAULT_LEN_CAP = 24

HALT, LIT, YCOPY, READ, EMIT, PIPE, JMP, JNZ, NOT, DUP, YTAKE, YBIT, SKIPZ = range(13)

OPCODES: dict[str, int] = {
    "0": HALT,
    "100": LIT,
    "101": YCOPY,
    "1100": READ,
    "1101": EMIT,
    "11100": PIPE,
    "11101": JMP,
    "111100": JNZ,
    "111101": NOT,
    "111110": DUP,
    "1111110": YTAKE,
    "11111110": YBIT,
    "11111111": SKIPZ,
}
MNEMONIC = {
    HALT: "HALT", LIT: "LIT", YCOPY: "YCOPY", READ: "READ", EMIT: "EMIT",
    PIPE: "PIPE", JMP: "JMP", JNZ: "JNZ", NOT: "NOT", DUP: "DUP",
    YTAKE: "YTAKE", YBIT: "YBIT", SKIPZ: "SKIPZ",
}
CODE_OF = {op: code for code, op in OPCODES.items()}
_HAS_INT_ARG = frozenset({LIT, JMP, JNZ, YTAKE})
_MAX_OPCODE_LEN = max(map(len, OPCODES))


def gamma(n: int) -> str:
    """Elias gamma code of ``n >= 1``."""
    if n < 1:
        raise ValueError("gamma code needs n >= 1")
    b = format(n, "b")
    return "0" * (len(b) - 1) + b


def encode(*instructions) -> str:
    """Assemble ``("LIT", "0110")``, ``("JMP", 2)``, ``"HALT"`` ... into bits."""
    bits = []
    for ins in instructions:
        name, arg = (ins, None) if isinstance(ins, str) else ins
        op = next(k for k, v in MNEMONIC.items() if v == name)
        bits.append(CODE_OF[op])
        if op == LIT:
            bits.append(gamma(len(arg) + 1) + arg)
        elif op in _HAS_INT_ARG:
            bits.append(gamma(arg + 1))
    return "".join(bits)


IDENTITY_TRANSDUCER = encode("PIPE")


def _decode(bits: str):
    """Decode one instruction from the front of ``bits``.

    Returns ``(op, arg)`` when ``bits`` is exactly one complete instruction
    and ``None`` while it is still a proper prefix of one.  Because bits are
    fed one at a time a complete instruction is never followed by extras.
    """
    op = OPCODES.get(bits[:1]) if bits[:1] == "0" else None
    if op is None:
        for k in range(3, min(len(bits), _MAX_OPCODE_LEN) + 1):
            op = OPCODES.get(bits[:k])
            if op is not None:
                break
        else:
            return None
        rest = bits[k:]
    else:
        rest = bits[1:]
    if op not in _HAS_INT_ARG:
        return op, None
    z = len(rest) - len(rest.lstrip("0"))
    if len(rest) < 2 * z + 1:
        return None
    n = int(rest[z : 2 * z + 1], 2) - 1
    if op != LIT:
        return op, n
    lit = rest[2 * z + 1 :]
    if len(lit) < n:
        return None
    return op, lit


class Status(enum.Enum):
    HALTED = "halted"
    NEEDS_INPUT = "needs-input"
    OUT_OF_BUDGET = "out-of-budget"


class Variant(enum.Enum):
    PREFIX = "prefix"
    MONOTONE = "monotone"
    CONDITIONAL = "conditional"


@dataclass(frozen=True)
class MachineConfig:
    variant: Variant = Variant.PREFIX
    y: str | None = None
    isa: str = ISA_VERSION

    def __post_init__(self):
        if self.variant is Variant.CONDITIONAL and self.y is None:
            raise ValueError("the conditional machine needs a y tape")
        if self.y is not None and self.y.strip("01"):
            raise ValueError("y must be a bit string")

    @property
    def tape(self) -> str:
        return self.y or ""

    def to_json(self) -> dict:
        return {"variant": self.variant.value, "y": self.y, "isa": self.isa}

    def digest(self) -> bytes:
        return hashlib.sha256(json.dumps(self.to_json(), sort_keys=True).encode()).digest()


@dataclass(frozen=True)
class RunOutcome:
    status: Status
    output: str
    steps: int
    consumed: int

    @property
    def halted(self) -> bool:
        return self.status is Status.HALTED


class _VM:
    """Resumable machine state.  All fields hold immutable values."""

    __slots__ = ("code", "pc", "stack", "out", "ycur", "steps", "consumed", "pending", "skip", "halted")

    def __init__(self):
        self.code = ()
        self.pc = 0
        self.stack = ()
        self.out = ""
        self.ycur = 0
        self.steps = 0
        self.consumed = 0
        self.pending = ""
        self.skip = False
        self.halted = False

    def copy(self) -> "_VM":
        c = _VM.__new__(_VM)
        c.code = self.code
        c.pc = self.pc
        c.stack = self.stack
        c.out = self.out
        c.ycur = self.ycur
        c.steps = self.steps
        c.consumed = self.consumed
        c.pending = self.pending
        c.skip = self.skip
        c.halted = self.halted
        return c

    def feed(self, bit: str) -> None:
        self.pending += bit
        self.consumed += 1

    def run(self, budget: int, y: str, trace: list | None = None) -> Status:
        """Execute until the machine halts, needs a bit, or hits ``budget``."""
        if self.halted:
            return Status.HALTED
        code, pc, stack, out = self.code, self.pc, self.stack, self.out
        steps, pending, ycur = self.steps, self.pending, self.ycur
        status = None
        while True:
            if pc >= len(code):
                ins = _decode(pending)
                if ins is None:
                    status = Status.NEEDS_INPUT
                    break
                code = code + (ins,)
                pending = ""
                if self.skip:
                    self.skip = False
                    pc += 1
                    continue
            if steps >= budget:
                status = Status.OUT_OF_BUDGET
                break
            op, arg = code[pc]
            if op == READ or op == PIPE:
                if not pending:
                    status = Status.NEEDS_INPUT
                    break
                if op == PIPE:
                    out += pending
                else:
                    stack = (stack + (pending == "1",))[-STACK_CAP:]
                pending = ""
            steps += 1
            if trace is not None:
                trace.append((steps, pc, op, arg, stack, out))
            if op == HALT:
                self.halted = True
                status = Status.HALTED
                break
            elif op == LIT:
                out += arg
            elif op == YCOPY:
                out += y[ycur:]
                ycur = len(y)
            elif op == EMIT:
                if stack:
                    out += "1" if stack[-1] else "0"
                    stack = stack[:-1]
                else:
                    out += "0"
            elif op == JMP:
                pc = pc - arg if pc > arg else 0
                continue
            elif op == JNZ:
                top = stack[-1] if stack else False
                stack = stack[:-1]
                if top:
                    pc = pc - arg if pc > arg else 0
                    continue
            elif op == NOT:
                stack = stack[:-1] + (not stack[-1],) if stack else (True,)
            elif op == DUP:
                stack = (stack + (stack[-1] if stack else False,))[-STACK_CAP:]
            elif op == YTAKE:
                take = y[ycur : ycur + arg]
                out += take
                ycur += len(take)
            elif op == YBIT:
                stack = (stack + (ycur < len(y) and y[ycur] == "1",))[-STACK_CAP:]
                if ycur < len(y):
                    ycur += 1
            elif op == SKIPZ:
                top = stack[-1] if stack else False
                stack = stack[:-1]
                if not top:
                    if pc + 1 < len(code):
                        pc += 2
                    else:
                        pc += 1
                        self.skip = True
                    continue
            elif op == PIPE:
                continue
            pc += 1
        self.code, self.pc, self.stack, self.out = code, pc, stack, out
        self.steps, self.pending, self.ycur = steps, pending, ycur
        return status


def _run_stream(bits: str, budget: int, cfg: MachineConfig, trace: list | None = None) -> RunOutcome:
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    if bits.strip("01"):
        raise ValueError("program must be a bit string")
    vm = _VM()
    y = cfg.tape
    pos = 0
    while True:
        status = vm.run(budget, y, trace)
        if status is Status.NEEDS_INPUT and pos < len(bits):
            vm.feed(bits[pos])
            pos += 1
            continue
        return RunOutcome(status, vm.out, vm.steps, vm.consumed)


def run_prefix(p: str, budget: int, cfg: MachineConfig = MachineConfig()) -> RunOutcome:
    """Run the prefix (or conditional) machine on the stream ``p``.

    Bits of ``p`` after a HALT are never read; ``consumed`` tells how many
    were, and ``p[:consumed]`` is the program.
    """
    return _run_stream(p, budget, cfg)


def run_monotone(p: str, budget: int, cfg: MachineConfig = MachineConfig(Variant.MONOTONE)) -> str:
    """Output emitted after consuming as much of ``p`` as the budget allows."""
    return _run_stream(p, budget, cfg).output


def trace(p: str, budget: int, cfg: MachineConfig = MachineConfig()) -> str:
    """Human-readable execution trace, one line per step."""
    rows: list = []
    outcome = _run_stream(p, budget, cfg, rows)
    lines = []
    for steps, pc, op, arg, stack, out in rows:
        stack_s = "".join("1" if b else "0" for b in stack)
        arg_s = "" if arg is None else f" {arg}"
        lines.append(f"{steps:>5} pc={pc:<3} {MNEMONIC[op]}{arg_s:<10} stack=[{stack_s}] out={out!r}")
    lines.append(f"=> {outcome.status.value} output={outcome.output!r} steps={outcome.steps} consumed={outcome.consumed}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# exhaustive exploration of the program tree


@dataclass
class Exploration:
    """Everything one sweep of the program tree produced.

    ``leaves`` lists (program, outcome) for every leaf: halted programs,
    out-of-budget nodes and unfinished programs at ``max_len``.  ``monotone``
    holds integer weights scaled by ``2**max_len``: the mass of minimal
    programs whose monotone output extends each string, up to ``out_depth``.
    """

    max_len: int
    budget: int
    cfg: MachineConfig
    out_depth: int
    leaves: list[tuple[str, RunOutcome]] = field(default_factory=list)
    monotone: dict[str, int] = field(default_factory=dict)

    def halting(self) -> list[tuple[str, RunOutcome]]:
        return [(p, o) for p, o in self.leaves if o.halted]

    def kraft(self) -> Dyadic:
        return kraft_sum(p for p, _ in self.halting())


def _explore_from(roots, max_len, budget, y, out_depth, leaves, mono):
    stack = list(roots)
    push = stack.append
    while stack:
        vm, prog, parent_len = stack.pop()
        status = vm.run(budget, y)
        out = vm.out
        olen = len(out) if len(out) < out_depth else out_depth
        if olen > parent_len:
            w = 1 << (max_len - len(prog))
            for k in range(parent_len + 1, olen + 1):
                key = out[:k]
                mono[key] = mono.get(key, 0) + w
        if status is Status.NEEDS_INPUT and len(prog) < max_len:
            one = vm.copy()
            one.feed("1")
            vm.feed("0")
            push((one, prog + "1", olen))
            push((vm, prog + "0", olen))
        else:
            leaves.append((prog, RunOutcome(status, out, vm.steps, vm.consumed)))


def _explore_block(args):
    roots, max_len, budget, y, out_depth = args
    leaves: list = []
    mono: dict = {}
    _explore_from(roots, max_len, budget, y, out_depth, leaves, mono)
    return leaves, mono


def explore(max_len: int, budget: int, cfg: MachineConfig = MachineConfig(), *, out_depth: int = 16,
            workers: int = 1, len_cap: int = DEFAULT_LEN_CAP) -> Exploration:
    """Walk every program of length ``<= max_len`` under ``budget`` steps.

    Machine states are shared along common prefixes, so each prefix is
    executed once.  With ``workers > 1`` the tree is split into blocks by
    program prefix and merged deterministically; the result does not
    depend on the worker count.
    """
    if max_len > len_cap:
        raise ValueError(f"max_len {max_len} exceeds the enumeration cap {len_cap}")
    if max_len < 0 or budget < 0:
        raise ValueError("max_len and budget must be nonnegative")
    y = cfg.tape
    result = Exploration(max_len, budget, cfg, out_depth)
    # The empty program always "outputs" the empty string.
    mono = {"": 1 << max_len}
    leaves: list = []
    root = (_VM(), "", 0)
    if workers <= 1 or max_len < 4:
        _explore_from([root], max_len, budget, y, out_depth, leaves, mono)
    else:
        split = min(max_len - 1, max(2, (4 * workers).bit_length()))
        frontier = _split_roots(root, split, max_len, budget, y, out_depth, leaves, mono)
        blocks = [frontier[i::workers] for i in range(workers)]
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            for blk_leaves, blk_mono in pool.map(
                _explore_block, [(b, max_len, budget, y, out_depth) for b in blocks]
            ):
                leaves.extend(blk_leaves)
                for k, v in blk_mono.items():
                    mono[k] = mono.get(k, 0) + v
    leaves.sort(key=lambda item: lenlex_key(item[0]))
    result.leaves = leaves
    result.monotone = mono
    return result


def _split_roots(root, split, max_len, budget, y, out_depth, leaves, mono):
    """Expand the tree down to ``split`` bits in-process; return the rest as roots."""
    frontier = []
    level = [root]
    for _ in range(split + 1):
        nxt = []
        for vm, prog, parent_len in level:
            if len(prog) == split:
                frontier.append((vm, prog, parent_len))
                continue
            status = vm.run(budget, y)
            out = vm.out
            olen = min(len(out), out_depth)
            if olen > parent_len:
                w = 1 << (max_len - len(prog))
                for k in range(parent_len + 1, olen + 1):
                    mono[out[:k]] = mono.get(out[:k], 0) + w
            if status is Status.NEEDS_INPUT:
                one = vm.copy()
                one.feed("1")
                vm.feed("0")
                nxt.append((vm, prog + "0", olen))
                nxt.append((one, prog + "1", olen))
            else:
                leaves.append((prog, RunOutcome(status, out, vm.steps, vm.consumed)))
        level = nxt
    return frontier


def enumerate_programs(max_len: int, budget: int, cfg: MachineConfig = MachineConfig(), *,
                       len_cap: int = DEFAULT_LEN_CAP, workers: int = 1) -> list[tuple[str, RunOutcome]]:
    """Classify every program of length ``<= max_len`` (length-lex order).

    Descendants of halted or out-of-budget programs are not listed: they
    would run identically.  Refuses ``max_len`` above ``len_cap``.
    """
    return explore(max_len, budget, cfg, workers=workers, len_cap=len_cap).leaves
