"""Command line entry point: ``enumdist <command> [options]``.

Every output starts with a header carrying the run configuration, the
snapshot hash and the instruction-set version.  Exit codes: 0 success,
2 configuration error, 3 stage shortfall, 4 snapshot corruption.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import random
import sys
from collections import Counter
from dataclasses import asdict, dataclass
from pathlib import Path

from . import information as info
from .core import INF, NEG_INF, Lattice, lenlex_key, strings_of_length, strings_upto
from .enumerator import DEFAULT_DEPTH, complexity
from .machine import ISA_VERSION, MachineConfig, explore
from .randomness import (
    DEFAULT_GRID_EXP,
    deficiency,
    deficiency_semimeasure,
    gap_form,
    ml_test,
    monotone_operator,
    regularize,
)
from .semimeasure import lebesgue, point_mass
from .snapshot import FORMAT_VERSION, Snapshot, SnapshotError, advance, compute, dumps, load, save, snapshot_hash

EXIT_OK, EXIT_CONFIG, EXIT_STAGE, EXIT_SNAPSHOT = 0, 2, 3, 4
SNAPSHOT_ENV = "ENUMDIST_SNAPSHOT_DIR"

log = logging.getLogger("enumdist")


class StageShortfall(Exception):
    pass


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    stage: int
    depth: int = DEFAULT_DEPTH
    grid_exp: int = DEFAULT_GRID_EXP
    cap: int = info.DEFAULT_CAP
    corpus: str | None = None
    snapshot: str | None = None
    format: str = "csv"
    seed: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


# ---------------------------------------------------------------------------
# output


def _cell(v):
    if v is None:
        return ""
    if v == INF:
        return "inf"
    if v == NEG_INF:
        return "-inf"
    return v


def render(cfg: RunConfig, snap_hash: str, columns: list[str], rows: list[list], extra: dict | None = None) -> str:
    header = {"config": json.loads(cfg.to_json()), "snapshot_sha256": snap_hash, "isa": ISA_VERSION}
    if extra:
        header.update(extra)
    if cfg.format == "json":
        body = [{c: _cell(v) for c, v in zip(columns, row)} for row in rows]
        return json.dumps({"header": header, "columns": columns, "rows": body}, indent=1, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write(f"# config {cfg.to_json()}\n")
    buf.write(f"# snapshot sha256={snap_hash}\n")
    buf.write(f"# isa {ISA_VERSION}\n")
    for k in sorted(extra or {}):
        buf.write(f"# {k} {json.dumps(extra[k], sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def parse_report(text: str) -> tuple[dict, list[str], list[dict]]:
    """Read back a report in either format: ``(header, columns, rows as strings)``."""
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        rows = [{c: ("" if r[c] is None else str(r[c])) for c in doc["columns"]} for r in doc["rows"]]
        return doc["header"], doc["columns"], rows
    lines = text.splitlines()
    header: dict = {}
    body = []
    for line in lines:
        if line.startswith("# config "):
            header["config"] = json.loads(line[len("# config "):])
        elif line.startswith("# snapshot sha256="):
            header["snapshot_sha256"] = line.split("=", 1)[1]
        elif line.startswith("# isa "):
            header["isa"] = line[len("# isa "):]
        elif line.startswith("# "):
            k, v = line[2:].split(" ", 1)
            header[k] = json.loads(v)
        else:
            body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    return header, columns, [dict(zip(columns, r)) for r in reader]


# ---------------------------------------------------------------------------
# snapshots


def snapshot_dir() -> Path:
    return Path(os.environ.get(SNAPSHOT_ENV, "."))


def default_snapshot_path(stage: int) -> Path:
    return snapshot_dir() / f"stage{stage:02d}.snap"


def obtain_snapshot(args, need_stage: int) -> tuple[Snapshot, str]:
    """Load the snapshot named in ``args`` (or compute ``need_stage`` when none is given)."""
    if args.snapshot:
        snap = load(args.snapshot, MachineConfig())
        data = dumps(snap)
        if snap.stage < need_stage:
            raise StageShortfall(
                f"insufficient stage: snapshot has stage {snap.stage}, {need_stage} required "
                f"(short by {need_stage - snap.stage})"
            )
        return snap, snapshot_hash(data)
    snap = compute(need_stage, depth=args.depth, workers=args.workers)
    return snap, snapshot_hash(dumps(snap))


# ---------------------------------------------------------------------------
# commands


def cmd_enumerate(args, cfg: RunConfig) -> str:
    path = Path(args.out) if args.out else default_snapshot_path(args.stage)
    if args.resume:
        snap = load(args.resume, MachineConfig())
        if snap.stage > args.stage:
            raise ConfigError(f"snapshot stage {snap.stage} is beyond the target {args.stage}")
        while snap.stage < args.stage:
            snap = advance(snap, workers=args.workers)
            print(f"stage {snap.stage}: {len(snap.discrete.mass)} strings", file=sys.stderr)
    else:
        snap = compute(args.stage, depth=args.depth, workers=args.workers)
    data = save(snap, path)
    kraft = snap.discrete.kraft()
    hist = Counter(complexity(snap.discrete, x) for x in snap.discrete.mass)
    tree = snap.continuous.tree if snap.continuous is not None else None
    rows = [[k, hist[k]] for k in sorted(hist)]
    extra = {
        "stage": snap.stage,
        "kraft": str(kraft),
        "kraft_float": float(kraft),
        "discrete_entries": len(snap.discrete.mass),
        "halting_programs": len(snap.discrete.records),
        "tree_nodes": len(tree.items()) if tree is not None else 0,
        "snapshot_path": str(path) if args.out else path.name,
    }
    return render(cfg, snapshot_hash(data), ["K_t", "count"], rows, extra)


def _strings(args) -> list[str]:
    if args.strings:
        xs = args.strings.split(",")
    else:
        xs = list(strings_upto(args.max_len))
    for x in xs:
        if x.strip("01"):
            raise ConfigError(f"{x!r} is not a bit string")
    return sorted(set(xs), key=lenlex_key)


def cmd_report_complexity(args, cfg: RunConfig) -> str:
    snap, h = obtain_snapshot(args, args.stage)
    d = snap.discrete.restrict(args.stage)
    cont = snap.continuous if snap.stage == args.stage else compute(args.stage, depth=snap.depth).continuous
    rows = []
    for x in _strings(args):
        km = complexity(cont, x) if cont is not None and len(x) <= cont.tree.depth else None
        rows.append([x, args.stage, str(d[x]), complexity(d, x), str(cont[x]) if km is not None else "", km])
    return render(cfg, h, ["string", "stage", "m_t", "K_t", "M_t", "KM_t"], rows)


def _samples(args) -> list[str]:
    if args.count:
        rng = random.Random(args.seed)
        xs = {"".join(rng.choice("01") for _ in range(args.sample_depth)) for _ in range(args.count)}
        return sorted(xs, key=lenlex_key)
    return list(strings_of_length(args.sample_depth))


def cmd_report_deficiency(args, cfg: RunConfig) -> str:
    snap, h = obtain_snapshot(args, args.stage)
    bound = snap.discrete.restrict(args.stage)
    rows = []
    if args.against == "lambda":
        lam = lebesgue()
        for x in _samples(args):
            d = deficiency(ml_test(lam, x, bound)).value
            rows.append([x, args.stage, d, gap_form(lam, x, bound), len(x)])
    else:
        if snap.stage != args.stage:
            raise ConfigError("deficiency against the machine semimeasure needs --stage equal to the snapshot stage")
        M = snap.continuous.tree
        reg = regularize(M, [monotone_operator(args.stage, snap.depth, workers=args.workers)], stage=args.stage)
        for x in _samples(args):
            if len(x) > M.depth:
                raise ConfigError(f"sample depth exceeds table depth {M.depth}")
            d = deficiency_semimeasure(point_mass(x), M, Lattice(len(x)), bound, grid_exp=args.grid_exp,
                                       reg=reg).value
            rows.append([x, args.stage, d, gap_form(M, x, bound), len(x)])
    return render(cfg, h, ["prefix", "stage", "formula", "gap", "lattice_depth"], rows)


def _corpus(args) -> list[tuple[str, str]]:
    if args.corpus:
        try:
            return info.load_corpus(args.corpus)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read corpus: {exc}") from exc
    return info.make_corpus(args.pairs, args.max_len, args.seed)


def cmd_report_info(args, cfg: RunConfig) -> str:
    snap, h = obtain_snapshot(args, args.stage)
    cache = info.ConditionalCache(args.stage)
    rows = []
    for i, (a, b) in enumerate(_corpus(args)):
        r = info.info_report(a, b, cache, cap=args.cap)
        rows.append([i, a, b, r.stage, r.K_a, r.K_b, r.K_ab, r.I, r.i_bound, r.sup_bound, r.witness])
    cols = ["pair_id", "a", "b", "stage", "K_a", "K_b", "K_ab", "I", "i_bound", "sup_bound", "witness"]
    return render(cfg, h, cols, rows)


def cmd_run_conservation(args, cfg: RunConfig) -> str:
    snap, h = obtain_snapshot(args, args.stage)
    bound = snap.discrete.restrict(args.stage)
    corpus = _corpus(args)
    rows, summary = [], {}
    for name in args.transforms.split(","):
        if name not in info.TRANSFORMS:
            raise ConfigError(f"unknown transform {name!r}")
        recs = info.conservation_harness(name, corpus, bound)
        s = info.summarize(recs)
        summary[name] = {"resolved": s.resolved, "total": s.total, "constant": s.constant}
        for r in recs:
            rows.append([r.transform, r.pair_id, r.a, r.b, r.stage, r.I_before, r.I_after, r.slack, r.status])
    cols = ["transform", "pair_id", "a", "b", "stage", "I_before", "I_after", "slack", "status"]
    return render(cfg, h, cols, rows, {"summary": summary})


def cmd_demo_occam(args, cfg: RunConfig) -> str:
    """``I(x : K(x))`` next to ``K(K(x))``, both at the same stage (a demonstration only)."""
    snap, h = obtain_snapshot(args, args.stage)
    bound = snap.discrete.restrict(args.stage)
    rows = []
    for x in _strings(args):
        k = complexity(bound, x)
        if k == INF:
            rows.append([x, k, "", "", ""])
            continue
        kb = format(k, "b")
        rows.append([x, k, kb, info.info_finite(x, kb, bound).I, complexity(bound, kb)])
    return render(cfg, h, ["x", "K_t", "k_bits", "I_t(x:k)", "K_t(k)"], rows)


def cmd_demo_chi(args, cfg: RunConfig) -> str:
    """Halting bits of the step-bounded machine in length-lex program order (not the limit sequence)."""
    snap, h = obtain_snapshot(args, args.stage)
    bound = snap.discrete.restrict(args.stage)
    ex = explore(args.chi_len, args.stage * args.stage, MachineConfig(), out_depth=0)
    halted = {p for p, o in ex.leaves if o.halted}
    programs = list(strings_upto(args.chi_len))
    chi = "".join("1" if p in halted else "0" for p in programs)
    rows = []
    for n in range(0, min(len(chi), args.max_len) + 1):
        rows.append([n, chi[:n], complexity(bound, chi[:n])])
    return render(cfg, h, ["n", "chi_prefix", "K_t"], rows, {"chi_programs_upto": args.chi_len})


COMMANDS = {
    "enumerate": cmd_enumerate,
    "report-complexity": cmd_report_complexity,
    "report-deficiency": cmd_report_deficiency,
    "report-info": cmd_report_info,
    "run-conservation": cmd_run_conservation,
    "demo-occam": cmd_demo_occam,
    "demo-chi": cmd_demo_chi,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="enumdist", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, stage_default):
        p.add_argument("--stage", type=int, default=stage_default)
        p.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
        p.add_argument("--snapshot", help="snapshot to read (computed on the fly when omitted)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", "-o", help="write here instead of stdout")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--grid-exp", type=int, default=DEFAULT_GRID_EXP)
        p.add_argument("--cap", type=int, default=info.DEFAULT_CAP)
        p.add_argument("--corpus")
        return p

    p = common(sub.add_parser("enumerate", help="advance the stage bounds and write a snapshot"), 18)
    p.add_argument("--out", help=f"snapshot path (default: ${SNAPSHOT_ENV}/stageNN.snap)")
    p.add_argument("--resume", help="snapshot to continue from")

    p = common(sub.add_parser("report-complexity", help="K_t and KM_t of strings"), 18)
    p.add_argument("--strings", help="comma-separated bit strings")
    p.add_argument("--max-len", type=int, default=4)

    p = common(sub.add_parser("report-deficiency", help="randomness deficiencies of prefixes"), 18)
    p.add_argument("--against", choices=("lambda", "machine"), default="lambda")
    p.add_argument("--sample-depth", type=int, default=12)
    p.add_argument("--count", type=int, default=0, help="random samples (0: every string of the depth)")

    for name, stage in (("report-info", info.SANDWICH_STAGE), ("run-conservation", info.INFO_STAGE)):
        p = common(sub.add_parser(name, help="information reports" if name == "report-info" else
                                  "conservation records per transform"), stage)
        p.add_argument("--pairs", type=int, default=500)
        p.add_argument("--max-len", type=int, default=12)
        if name == "run-conservation":
            p.add_argument("--transforms", default=",".join(info.TRANSFORMS))

    p = common(sub.add_parser("demo-occam", help="I(x:K(x)) against K(K(x))"), 18)
    p.add_argument("--strings")
    p.add_argument("--max-len", type=int, default=3)

    p = common(sub.add_parser("demo-chi", help="halting bits of the step-bounded machine"), 18)
    p.add_argument("--chi-len", type=int, default=4)
    p.add_argument("--max-len", type=int, default=12)
    return ap


def run_config(args) -> RunConfig:
    return RunConfig(
        command=args.command, stage=args.stage, depth=args.depth, grid_exp=args.grid_exp, cap=args.cap,
        corpus=args.corpus, snapshot=args.snapshot, format=args.format, seed=args.seed,
    )


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(name)s: %(message)s")
    try:
        if args.stage < 0 or args.depth < 0 or args.workers < 1:
            raise ConfigError("stage and depth must be nonnegative and workers positive")
        cfg = run_config(args)
        text = COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"enumdist: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageShortfall as exc:
        print(f"enumdist: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except SnapshotError as exc:
        print(f"enumdist: snapshot error (format version {FORMAT_VERSION}): {exc}", file=sys.stderr)
        return EXIT_SNAPSHOT
    except ValueError as exc:
        print(f"enumdist: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
