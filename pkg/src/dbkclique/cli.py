"""Command line entry point: ``dbkclique {solve,decompose,gen,bench}``."""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path

import numpy as np

from .anneal import TtsModel
from .engine import (
    LOWER_BOUNDS,
    REDUCTIONS,
    STRATEGIES,
    UPPER_BOUNDS,
    BackendError,
    SolverConfig,
    dbk_solve,
    decompose,
)
from .graph import DimacsParseError, density, gnp_generate, read_dimacs, write_dimacs

log = logging.getLogger("dbkclique")

WORKERS_ENV = "DBKCLIQUE_WORKERS"
DEFAULT_ROOT_SEED = 20170801

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BACKEND = 3
EXIT_IO = 4

ALL_BOUNDS = UPPER_BOUNDS | LOWER_BOUNDS


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# flag parsing helpers


def parse_set(text: str, allowed: frozenset, what: str) -> frozenset:
    """Comma separated names; ``none`` is the empty set and ``all`` every name."""
    text = text.strip()
    if text in ("none", ""):
        return frozenset()
    if text == "all":
        return frozenset(allowed)
    names = frozenset(t.strip() for t in text.split(",") if t.strip())
    unknown = names - allowed
    if unknown:
        raise UsageError(f"unknown {what}: {', '.join(sorted(unknown))} (known: {', '.join(sorted(allowed))})")
    return names


def parse_range(text: str) -> list[float]:
    """``a:b:step`` (inclusive) or a single value, all within [0, 1]."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            a = b = float(parts[0])
            step = 1.0
        elif len(parts) == 3:
            a, b, step = map(float, parts)
        else:
            raise ValueError
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected a:b:step") from None
    if not (0.0 <= a <= b <= 1.0) or step <= 0:
        raise UsageError(f"bad range {text!r}; need 0 <= a <= b <= 1 and step > 0")
    count = int(np.floor((b - a) / step + 1e-9)) + 1
    return [round(a + i * step, 10) for i in range(count)]


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def split_bounds(names: frozenset) -> tuple[frozenset, frozenset]:
    return names & UPPER_BOUNDS, names & LOWER_BOUNDS


def config_from_args(args, **overrides) -> SolverConfig:
    upper, lower = split_bounds(parse_set(args.bounds, ALL_BOUNDS, "bounds"))
    kw = dict(
        max_leaf_size=args.max_size,
        strategy=args.strategy,
        upper_bounds=upper,
        lower_bounds=lower,
        reductions=parse_set(args.reductions, REDUCTIONS, "reductions"),
        backend=args.backend,
        seed=args.seed,
        lovasz_cutoff=args.lovasz_cutoff,
        dense_threshold=args.dense_threshold,
        edge_kcore_compat=args.edge_kcore_compat,
        workers=args.workers or default_workers(),
        tts_table=TtsModel.from_csv(args.tts_table) if args.tts_table else None,
    )
    kw.update(overrides)
    return SolverConfig(**kw)


def fingerprint(config: SolverConfig) -> str:
    """Stable short hash of the canonical configuration (seed excluded)."""
    canon = config.canonical()
    canon.pop("seed", None)
    blob = json.dumps(canon, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


# ---------------------------------------------------------------------------
# commands


def cmd_solve(args) -> int:
    graph = read_dimacs(args.path)
    config = config_from_args(args, trace=args.trace)
    report = dbk_solve(graph, config)
    payload = {
        "instance": str(args.path),
        "n": graph.n,
        "m": graph.m,
        "fingerprint": fingerprint(config),
        **report.to_dict(),
    }
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
    if args.json:
        print(json.dumps(payload))
    else:
        clique = ",".join(str(v) for v in report.clique)
        print(f"omega {report.omega}, clique {{{clique}}}")
        print(
            f"subgraphs generated {report.subgraphs_generated}, pruned {report.subgraphs_pruned}, "
            f"leaves {report.leaves_solved}"
        )
        print(f"charged tts {report.charged_tts_seconds:.6f} s, wall {report.wall_seconds:.3f} s")
    return EXIT_OK


def cmd_decompose(args) -> int:
    graph = read_dimacs(args.path)
    config = config_from_args(args, workers=1)
    leaves, report = decompose(graph, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(len(leaves))))
    with open(out / "manifest.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["leaf_id", "size", "density", "anchors", "file"])
        for i, leaf in enumerate(leaves):
            name = f"leaf_{i:0{width}d}.clq"
            comments = [
                f"anchors {' '.join(map(str, leaf.anchors)) or '-'}",
                f"labels {' '.join(map(str, leaf.graph.labels)) or '-'}",
            ]
            write_dimacs(leaf.graph, out / name, comments)
            writer.writerow([i, leaf.graph.n, f"{density(leaf.graph):.6f}", len(leaf.anchors), name])
    log.info("%d leaves written to %s (%d subgraphs generated, %d pruned)",
             len(leaves), out, report.subgraphs_generated, report.subgraphs_pruned)
    print(f"leaves {len(leaves)}")
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.n < 0 or not 0.0 <= args.p <= 1.0:
        raise UsageError("need n >= 0 and 0 <= p <= 1")
    graph = gnp_generate(args.n, args.p, args.seed)
    comments = [f"G(n={args.n}, p={args.p}) seed {args.seed}"]
    write_dimacs(graph, args.out if args.out else sys.stdout, comments)
    return EXIT_OK


# bench ----------------------------------------------------------------------


@dataclass(frozen=True)
class RunRecord:
    instance_id: str
    n: int
    m: int
    density: float
    config_fingerprint: str
    omega: int
    subgraphs_generated: int
    subgraphs_pruned: int
    charged_tts_seconds: float
    wall_seconds: float
    seed: int


RUN_RECORD_COLUMNS = tuple(f.name for f in fields(RunRecord))


def instance_seed(root: int, density_index: int, rep: int) -> int:
    """Graph seed for one (density, repetition) cell; shared by every config."""
    return int(np.random.SeedSequence(root, spawn_key=(density_index, rep)).generate_state(1, np.uint64)[0])


def _run_one(task) -> tuple[tuple, RunRecord]:
    key, n, p, seed, config = task
    graph = gnp_generate(n, p, seed)
    t0 = time.perf_counter()
    report = dbk_solve(graph, SolverConfig(**{**config.__dict__, "seed": seed}))
    wall = time.perf_counter() - t0
    record = RunRecord(
        instance_id=f"gnp-n{n}-p{p:g}-s{seed}",
        n=graph.n,
        m=graph.m,
        density=round(density(graph), 6),
        config_fingerprint=fingerprint(config),
        omega=report.omega,
        subgraphs_generated=report.subgraphs_generated,
        subgraphs_pruned=report.subgraphs_pruned,
        charged_tts_seconds=report.charged_tts_seconds,
        wall_seconds=round(wall, 6),
        seed=seed,
    )
    return key, record


def bench_tasks(args) -> list:
    densities = parse_range(args.densities)
    if args.n < 1 or args.reps < 1:
        raise UsageError("need n >= 1 and reps >= 1")
    strategies = []
    for s in args.strategies:
        for name in s.split(","):
            if name not in STRATEGIES:
                raise UsageError(f"unknown strategy {name!r} (known: {', '.join(STRATEGIES)})")
            strategies.append(name)
    bound_sets = [parse_set(b, ALL_BOUNDS, "bounds") for b in args.bounds]
    reduction_sets = [parse_set(r, REDUCTIONS, "reductions") for r in args.reductions]
    table = TtsModel.from_csv(args.tts_table) if args.tts_table else None
    tasks = []
    for di, p in enumerate(densities):
        for rep in range(args.reps):
            seed = instance_seed(args.root_seed, di, rep)
            for si, strategy in enumerate(strategies):
                for bi, bset in enumerate(bound_sets):
                    upper, lower = split_bounds(bset)
                    for ri, rset in enumerate(reduction_sets):
                        config = SolverConfig(
                            max_leaf_size=args.max_size,
                            strategy=strategy,
                            upper_bounds=upper,
                            lower_bounds=lower,
                            reductions=rset,
                            backend=args.backend,
                            tts_table=table,
                        )
                        tasks.append(((di, si, bi, ri, rep), args.n, p, seed, config))
    return tasks


def run_bench(tasks, workers: int = 1) -> list[RunRecord]:
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_run_one(t) for t in tasks]
    results.sort(key=lambda kr: kr[0])
    return [r for _, r in results]


def write_records(records, target, wall: bool = True) -> None:
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(RUN_RECORD_COLUMNS)
    for rec in records:
        row = list(astuple(rec))
        if not wall:
            row[RUN_RECORD_COLUMNS.index("wall_seconds")] = ""
        writer.writerow(row)


def cmd_bench(args) -> int:
    tasks = bench_tasks(args)
    workers = args.workers or default_workers()
    log.info("bench: %d runs on %d worker(s)", len(tasks), workers)
    records = run_bench(tasks, workers)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_records(records, fh, wall=not args.no_wall)
    else:
        write_records(records, sys.stdout, wall=not args.no_wall)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parser


def _add_config_flags(p: argparse.ArgumentParser, bench: bool = False) -> None:
    p.add_argument("--max-size", type=int, default=46, help="largest leaf handed to the backend (default 46)")
    if not bench:
        p.add_argument("--strategy", choices=STRATEGIES, default="lowest-degree")
        p.add_argument("--bounds", default="greedy-coloring,dense-edge,sibling",
                       help="comma separated subset of %s, or none/all" % ",".join(sorted(ALL_BOUNDS)))
        p.add_argument("--reductions", default="vertex-kcore,edge-kcore",
                       help="comma separated subset of %s, or none/all" % ",".join(sorted(REDUCTIONS)))
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--lovasz-cutoff", type=int, default=60)
        p.add_argument("--dense-threshold", type=float, default=0.8)
        p.add_argument("--edge-kcore-compat", action="store_true", help="use the looser L-2 edge k-core threshold")
    p.add_argument("--backend", choices=("exact", "sa", "emulated-annealer"), default="emulated-annealer")
    p.add_argument("--workers", type=int, default=None, help=f"worker count (default: ${WORKERS_ENV} or 1)")
    p.add_argument("--tts-table", default=None, help="CSV with columns density,p,t_run,tts")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dbkclique", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="maximum clique of a DIMACS graph")
    p.add_argument("path")
    _add_config_flags(p)
    p.add_argument("--json", action="store_true", help="print the report as one JSON object")
    p.add_argument("--out", default=None, help="also write the JSON report here")
    p.add_argument("--trace", action="store_true", help="include the event trace in the report")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("decompose", help="split a graph into leaves without solving them")
    p.add_argument("path")
    _add_config_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("gen", help="write a G(n, p) instance as DIMACS")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="file (default stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="factorial sweep over G(n, p) instances, CSV out")
    p.add_argument("--densities", default="0.1:0.9:0.1", help="a:b:step, inclusive")
    p.add_argument("--n", type=int, default=80)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--strategies", nargs="+", default=["lowest-degree"])
    p.add_argument("--bounds", nargs="+", default=["greedy-coloring,dense-edge,sibling"],
                   help="one or more bound sets (comma separated names, none, all)")
    p.add_argument("--reductions", nargs="+", default=["vertex-kcore,edge-kcore"],
                   help="one or more reduction sets")
    p.add_argument("--root-seed", type=int, default=DEFAULT_ROOT_SEED)
    p.add_argument("--out", default=None, help="CSV file (default stdout)")
    p.add_argument("--no-wall", action="store_true", help="leave wall_seconds blank for byte-stable output")
    _add_config_flags(p, bench=True)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (DimacsParseError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BackendError as exc:
        print(f"backend failure: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:  # invalid configuration values
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
