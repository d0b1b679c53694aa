"""Command-line benchmark driver.

Every list-valued flag accepts comma-separated values and the cross product
is swept, e.g. ``--structure rbtree,btree --workers 1,2,4,8``.
"""

from __future__ import annotations

import argparse
import itertools
import logging
import sys
from typing import Sequence

from ..core import LaunchConfig
from ..substrate import default_worker_count
from .csvio import emit_csv
from .registry import STRUCTURES
from .runner import MODES, BenchmarkError, Measurement, mean_throughput, run_benchmark
from .workload import MIXES, WorkloadSpec


def _choices(allowed: Sequence[str]):
    def parse(text: str) -> list[str]:
        items = [s.strip() for s in text.split(",") if s.strip()]
        bad = [s for s in items if s not in allowed]
        if bad or not items:
            raise argparse.ArgumentTypeError(f"invalid choice {','.join(bad) or text!r} (choose from {', '.join(allowed)})")
        return items
    return parse


def _ints(text: str) -> list[int]:
    try:
        vals = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return vals


def _count(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="batcherkit-bench", description="Throughput benchmarks for batched structures.")
    p.add_argument("--structure", type=_choices(list(STRUCTURES)), default=["rbtree"],
                   help=f"one or more of {','.join(STRUCTURES)}")
    p.add_argument("--mode", type=_choices(MODES), default=["batched"], help="batched, coarse and/or seq")
    p.add_argument("--mix", type=_choices(list(MIXES)), default=["insert"], help="insert, search, 50-50 and/or 90-10")
    p.add_argument("--initial", type=_count, default=200_000, help="keys preloaded before timing")
    p.add_argument("--ops", type=int, default=100_000, help="operations per run")
    p.add_argument("--workers", type=_ints, default=None,
                   help="worker counts (default: $BATCHERKIT_WORKERS or the CPU count)")
    p.add_argument("--warmups", type=_count, default=5)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--key-space", type=int, default=1 << 21, help="keys are drawn from [0, KEY_SPACE)")
    p.add_argument("--min-batch", type=int, default=1)
    p.add_argument("--wait-threshold", type=float, default=0.001, help="seconds")
    p.add_argument("--csv", metavar="PATH", help="write one row per timed run")
    p.add_argument("--verify", action="store_true", help="check final contents against an oracle after each run")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    workers = args.workers or [default_worker_count()]
    try:
        launch = LaunchConfig(args.min_batch, args.wait_threshold)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    results: list[Measurement] = []
    print(f"{'structure':<9} {'mode':<8} {'workers':>7} {'mix':<6} {'mean ops/s':>12}")
    try:
        for structure, mix, mode in itertools.product(args.structure, args.mix, args.mode):
            spec = WorkloadSpec(structure, args.initial, args.ops, mix, args.key_space, args.seed)
            for w in ([1] if mode == "seq" else workers):
                runs = run_benchmark(spec, mode, w, args.warmups, args.repeats,
                                     verify=args.verify, launch=launch)
                results.extend(runs)
                print(f"{structure:<9} {mode:<8} {w:>7} {mix:<6} {mean_throughput(runs):>12.0f}", flush=True)
        if args.csv:
            emit_csv(results, args.csv)
    except (BenchmarkError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0
