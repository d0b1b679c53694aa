"""Throughput measurement for batched, coarse-locked and sequential modes."""

from __future__ import annotations

import logging
import statistics
import threading
import time
from dataclasses import dataclass
from typing import Any, Sequence

from ..adhoc.coarse import CoarseWrapper
from ..core import LaunchConfig, wrap
from ..ops import Insert, Incr
from ..substrate import Pool
from .registry import STRUCTURES, StructureEntry
from .workload import WorkloadSpec, gen_initial_keys, gen_workload

__all__ = ["MODES", "BenchmarkError", "Measurement", "mean_throughput", "run_benchmark"]

log = logging.getLogger(__name__)

MODES = ("batched", "coarse", "seq")


class BenchmarkError(RuntimeError):
    pass


@dataclass(frozen=True, slots=True)
class Measurement:
    structure: str
    mode: str
    workers: int
    mix: str
    initial_size: int
    op_count: int
    run: int
    throughput: float
    warmup: bool = False


def _preload(entry: StructureEntry, data: Any, keys: Sequence[int]) -> None:
    if entry.kind == "counter":
        data.count += len(keys)
    elif entry.kind == "map":
        for k in keys:
            data.insert(k, k)
    else:
        for k in keys:
            data.insert(k)


def _contents(entry: StructureEntry, data: Any) -> Any:
    return data.count if entry.kind == "counter" else list(data.keys())


def _expected(entry: StructureEntry, initial: Sequence[int], ops: Sequence[Any]) -> Any:
    if entry.kind == "counter":
        return len(initial) + sum(1 for op in ops if type(op) is Incr)
    return sorted(set(initial).union(op.key for op in ops if type(op) is Insert))


class _Latch:
    """Counts completions; the last one sets ``done``."""

    def __init__(self, n: int) -> None:
        self.left = n
        self.lock = threading.Lock()
        self.done = threading.Event()
        self.errors: list[BaseException] = []

    def hit(self, error: BaseException | None = None) -> None:
        with self.lock:
            if error is not None:
                self.errors.append(error)
            self.left -= 1
            if self.left == 0:
                self.done.set()


def _time_batched(pool: Pool, bs: Any, ops: Sequence[Any]) -> float:
    latch = _Latch(len(ops))

    async def client(op: Any) -> None:
        try:
            await bs.apply(op)
        except BaseException as exc:  # noqa: BLE001
            latch.hit(exc)
        else:
            latch.hit()

    start = time.monotonic()
    for op in ops:
        pool.spawn(client(op))
    latch.done.wait()
    # inserts may be acknowledged before their batch is through with the structure
    bs.wait_idle()
    elapsed = time.monotonic() - start
    if latch.errors:
        raise BenchmarkError(f"{len(latch.errors)} operations failed, first: {latch.errors[0]!r}")
    return elapsed


def _time_coarse(pool: Pool, cw: CoarseWrapper, ops: Sequence[Any]) -> float:
    latch = _Latch(len(ops))

    def client(op: Any) -> None:
        try:
            cw.apply(op)
        except BaseException as exc:  # noqa: BLE001
            latch.hit(exc)
        else:
            latch.hit()

    start = time.monotonic()
    for op in ops:
        pool.submit(client, op)
    latch.done.wait()
    elapsed = time.monotonic() - start
    if latch.errors:
        raise BenchmarkError(f"{len(latch.errors)} operations failed, first: {latch.errors[0]!r}")
    return elapsed


def _time_seq(data: Any, ops: Sequence[Any]) -> float:
    apply = data.apply_op
    start = time.monotonic()
    for op in ops:
        apply(op)
    return time.monotonic() - start


def run_benchmark(
    spec: WorkloadSpec,
    mode: str,
    workers: int = 1,
    warmups: int = 5,
    repeats: int = 5,
    *,
    verify: bool = False,
    launch: LaunchConfig | None = None,
) -> list[Measurement]:
    """Run ``warmups`` untimed and ``repeats`` timed runs; returns every run.

    Each run starts from a freshly built structure preloaded (untimed) with
    the same initial keys, then pushes the whole workload through it.  In
    the concurrent modes every operation is its own pool task.  With
    ``verify`` the final contents are checked against a sorted-set oracle.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; pick one of {MODES}")
    if repeats < 1 or warmups < 0:
        raise ValueError("need repeats >= 1 and warmups >= 0")
    try:
        entry = STRUCTURES[spec.structure]
    except KeyError:
        raise ValueError(f"unknown structure {spec.structure!r}; pick one of {sorted(STRUCTURES)}") from None
    if mode == "seq":
        workers = 1
    initial = gen_initial_keys(spec)
    ops = gen_workload(spec, entry.kind)
    expected = _expected(entry, initial, ops) if verify else None
    expected_size = spec.initial_size + spec.op_count
    launch = launch or LaunchConfig()

    out: list[Measurement] = []
    pool = Pool(workers, name=f"bench-{mode}") if mode != "seq" else None
    try:
        for run in range(warmups + repeats):
            if mode == "batched":
                bs = wrap(entry.batched(spec.key_space, expected_size), pool, launch)
                data = bs.data
                _preload(entry, data, initial)
                elapsed = _time_batched(pool, bs, ops)
            elif mode == "coarse":
                data = entry.sequential(spec.key_space, expected_size)
                _preload(entry, data, initial)
                elapsed = _time_coarse(pool, CoarseWrapper(data), ops)
            else:
                data = entry.sequential(spec.key_space, expected_size)
                _preload(entry, data, initial)
                elapsed = _time_seq(data, ops)
            if verify:
                got = _contents(entry, data)
                if got != expected:
                    detail = (f"count {got} != {expected}" if entry.kind == "counter" else
                              f"{len(got)} keys vs {len(expected)} expected; first difference near "
                              f"{next((a, b) for a, b in zip(got + [None], expected + [None]) if a != b)}")
                    raise BenchmarkError(f"{spec.structure}/{mode} run {run}: contents differ from oracle: {detail}")
            warm = run < warmups
            m = Measurement(spec.structure, mode, workers, spec.mix, spec.initial_size, spec.op_count,
                            run - warmups if not warm else run, len(ops) / max(elapsed, 1e-9), warm)
            log.info("%s", m)
            out.append(m)
    finally:
        if pool is not None:
            pool.shutdown()
    return out


def mean_throughput(measurements: Sequence[Measurement]) -> float:
    """Mean ops/s over the timed (non-warm-up) runs."""
    timed = [m.throughput for m in measurements if not m.warmup]
    if not timed:
        raise ValueError("no timed runs")
    return statistics.fmean(timed)
