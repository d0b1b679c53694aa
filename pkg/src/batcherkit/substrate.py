"""Execution primitives: worker pool, deferred cells, fork-join helpers.

Pool tasks are either plain callables or coroutines.  A coroutine that does
``await cell`` on an unresolved :class:`DeferredCell` yields the cell back to
the pool driver, which parks the coroutine and frees the worker thread.  When
the cell is resolved, the continuation is *submitted as a new pool task*; the
resolver never runs it inline.  This is the property the batching layer relies
on to keep batch executors from being hijacked by client code.
"""

from __future__ import annotations

import bisect
import heapq
import itertools
import logging
import os
import queue
import threading
import time
from dataclasses import dataclass
from typing import Any, Callable, Generic, Iterator, Sequence, TypeVar

from .errors import ContractViolation, PoolClosed

__all__ = [
    "Pool",
    "DeferredCell",
    "Range",
    "new_deferred",
    "current_task_id",
    "default_worker_count",
    "run_parallel_for",
    "par_do",
    "parallel_sort",
    "partition_by_pivots",
]

log = logging.getLogger(__name__)

V = TypeVar("V")

_local = threading.local()


def default_worker_count() -> int:
    env = os.environ.get("BATCHERKIT_WORKERS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError(f"BATCHERKIT_WORKERS must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


def current_task_id() -> int | None:
    """Sequence number of the pool task running on this thread, if any."""
    return getattr(_local, "task_id", None)


# ---------------------------------------------------------------------------
# Deferred cells
# ---------------------------------------------------------------------------

_UNRESOLVED = 0
_RESOLVED = 1
_FAILED = 2


class DeferredCell(Generic[V]):
    """One-shot result cell.

    Waiters are registered with :meth:`add_waiter` and always resume as
    separate tasks on the pool they registered with.  Coroutines running on a
    :class:`Pool` can simply ``await`` the cell.  Threads outside the pool may
    block on :meth:`wait`.
    """

    __slots__ = ("_lock", "_state", "_value", "_waiters", "_event")

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._state = _UNRESOLVED
        self._value: Any = None
        self._waiters: list[tuple[Pool, Callable[[DeferredCell[V]], None]]] = []
        self._event: threading.Event | None = None

    def _settle(self, state: int, value: Any) -> None:
        with self._lock:
            if self._state != _UNRESOLVED:
                raise ContractViolation("deferred cell resolved twice")
            self._state = state
            self._value = value
            waiters, self._waiters = self._waiters, []
            event = self._event
        for pool, fn in waiters:
            pool.submit(fn, self)
        if event is not None:
            event.set()

    def resolve(self, value: V) -> None:
        self._settle(_RESOLVED, value)

    def fail(self, exc: BaseException) -> None:
        self._settle(_FAILED, exc)

    @property
    def resolved(self) -> bool:
        return self._state != _UNRESOLVED

    @property
    def failed(self) -> bool:
        return self._state == _FAILED

    def value(self) -> V:
        state = self._state
        if state == _RESOLVED:
            return self._value
        if state == _FAILED:
            raise self._value
        raise ContractViolation("value() on an unresolved cell")

    def add_waiter(self, pool: Pool, fn: Callable[[DeferredCell[V]], None]) -> None:
        """Schedule ``fn(cell)`` on ``pool`` once the cell is resolved."""
        with self._lock:
            if self._state == _UNRESOLVED:
                self._waiters.append((pool, fn))
                return
        pool.submit(fn, self)

    def wait(self, timeout: float | None = None) -> V:
        """Block the calling thread until resolved.  Not for use on pool workers."""
        if getattr(_local, "pool", None) is not None:
            raise ContractViolation("blocking wait() on a pool worker; use 'await' instead")
        if self._state == _UNRESOLVED:
            with self._lock:
                if self._state == _UNRESOLVED and self._event is None:
                    self._event = threading.Event()
                event = self._event
            if event is not None and not event.wait(timeout):
                raise TimeoutError("deferred cell not resolved in time")
        return self.value()

    def __await__(self) -> Iterator[DeferredCell[V]]:
        if self._state == _UNRESOLVED:
            yield self
        return self.value()

    def __repr__(self) -> str:
        state = {0: "unresolved", 1: "resolved", 2: "failed"}[self._state]
        return f"<DeferredCell {state}>"


def new_deferred() -> tuple[DeferredCell[Any], Callable[[Any], None]]:
    cell: DeferredCell[Any] = DeferredCell()
    return cell, cell.resolve


# ---------------------------------------------------------------------------
# Pool
# ---------------------------------------------------------------------------

class _CoroutineTask:
    __slots__ = ("pool", "coro", "cell")

    def __init__(self, pool: Pool, coro: Any, cell: DeferredCell[Any]) -> None:
        self.pool = pool
        self.coro = coro
        self.cell = cell

    def step(self, _cell: DeferredCell[Any] | None = None) -> None:
        try:
            awaited = self.coro.send(None)
        except StopIteration as stop:
            self.cell.resolve(stop.value)
            return
        except BaseException as exc:  # noqa: BLE001 - delivered to the awaiting side
            self.cell.fail(exc)
            return
        if not isinstance(awaited, DeferredCell):
            self.coro.close()
            self.cell.fail(TypeError(f"pool coroutines may only await DeferredCell, got {awaited!r}"))
            return
        awaited.add_waiter(self.pool, self.step)


class _Timer:
    """Single background thread that submits delayed tasks to a pool."""

    def __init__(self, pool: Pool) -> None:
        self._pool = pool
        self._cond = threading.Condition()
        self._heap: list[tuple[float, int, Callable[..., Any], tuple[Any, ...]]] = []
        self._seq = itertools.count()
        self._stopped = False
        self._thread = threading.Thread(target=self._run, name=f"{pool.name}-timer", daemon=True)
        self._thread.start()

    def schedule(self, delay: float, fn: Callable[..., Any], args: tuple[Any, ...]) -> None:
        with self._cond:
            heapq.heappush(self._heap, (time.monotonic() + delay, next(self._seq), fn, args))
            self._cond.notify()

    def stop(self) -> None:
        with self._cond:
            self._stopped = True
            self._cond.notify()

    def _run(self) -> None:
        while True:
            with self._cond:
                while not self._stopped:
                    if not self._heap:
                        self._cond.wait()
                        continue
                    wait = self._heap[0][0] - time.monotonic()
                    if wait <= 0:
                        break
                    self._cond.wait(wait)
                if self._stopped:
                    return
                _, _, fn, args = heapq.heappop(self._heap)
            self._pool.submit(fn, *args)


class Pool:
    """Fixed-size pool of worker threads sharing one FIFO task queue."""

    def __init__(self, workers: int | None = None, *, name: str = "batcherkit") -> None:
        if workers is None:
            workers = default_worker_count()
        if workers < 1:
            raise ValueError(f"worker count must be >= 1, got {workers}")
        self.worker_count = workers
        self.name = name
        self._queue: queue.SimpleQueue[Any] = queue.SimpleQueue()
        self._count_lock = threading.Lock()
        self._submitted = 0
        self._timer: _Timer | None = None
        self._timer_lock = threading.Lock()
        self._closed = False
        self._threads = [
            threading.Thread(target=self._worker, name=f"{name}-{i}", daemon=True)
            for i in range(workers)
        ]
        for t in self._threads:
            t.start()

    # -- submission --------------------------------------------------------

    def submit(self, fn: Callable[..., Any], *args: Any) -> None:
        """Queue ``fn(*args)`` for execution on some worker."""
        with self._count_lock:
            if self._closed:
                raise PoolClosed("pool is shut down")
            self._submitted += 1
            task_id = self._submitted
        self._queue.put((task_id, fn, args))

    def submit_after(self, delay: float, fn: Callable[..., Any], *args: Any) -> None:
        if delay <= 0:
            self.submit(fn, *args)
            return
        if self._timer is None:
            with self._timer_lock:
                if self._timer is None:
                    self._timer = _Timer(self)
        self._timer.schedule(delay, fn, args)

    def spawn(self, work: Any, *args: Any) -> DeferredCell[Any]:
        """Run a coroutine object, or call ``work(*args)``, as a pool task.

        Returns a cell resolved with the result (or failed with the exception).
        """
        cell: DeferredCell[Any] = DeferredCell()
        if hasattr(work, "send") and hasattr(work, "throw"):
            self.submit(_CoroutineTask(self, work, cell).step)
        else:
            self.submit(_call_into, cell, work, args)
        return cell

    def run(self, work: Any, *args: Any, timeout: float | None = None) -> Any:
        """Spawn and block the calling (non-worker) thread for the result."""
        return self.spawn(work, *args).wait(timeout)

    @property
    def submitted(self) -> int:
        """Total number of tasks ever submitted (instrumentation)."""
        return self._submitted

    def on_worker(self) -> bool:
        return getattr(_local, "pool", None) is self

    # -- lifecycle ---------------------------------------------------------

    def shutdown(self, wait: bool = True) -> None:
        with self._count_lock:
            if self._closed:
                return
            self._closed = True
        if self._timer is not None:
            self._timer.stop()
        for _ in self._threads:
            self._queue.put(None)
        if wait and not self.on_worker():
            for t in self._threads:
                t.join()

    def __enter__(self) -> Pool:
        return self

    def __exit__(self, *exc: object) -> None:
        self.shutdown()

    def __repr__(self) -> str:
        return f"Pool(workers={self.worker_count}, name={self.name!r})"

    def _worker(self) -> None:
        _local.pool = self
        get = self._queue.get
        while True:
            item = get()
            if item is None:
                return
            task_id, fn, args = item
            _local.task_id = task_id
            try:
                fn(*args)
            except BaseException:  # noqa: BLE001 - a failing task must not kill the worker
                log.exception("unhandled error in pool task %d", task_id)
            finally:
                _local.task_id = None


def _call_into(cell: DeferredCell[Any], fn: Callable[..., Any], args: tuple[Any, ...]) -> None:
    try:
        result = fn(*args)
    except BaseException as exc:  # noqa: BLE001
        cell.fail(exc)
    else:
        cell.resolve(result)


# ---------------------------------------------------------------------------
# Structured parallelism
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Range:
    """Half-open index interval ``[start, end)``."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ContractViolation(f"Range start {self.start} > end {self.end}")

    def __len__(self) -> int:
        return self.end - self.start

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.start, self.end))


class _ForJob:
    __slots__ = ("start", "end", "chunk", "nchunks", "body", "lock", "next_chunk",
                 "finished", "error", "done")

    def __init__(self, start: int, end: int, chunk: int, nchunks: int,
                 body: Callable[[int], Any]) -> None:
        self.start = start
        self.end = end
        self.chunk = chunk
        self.nchunks = nchunks
        self.body = body
        self.lock = threading.Lock()
        self.next_chunk = 0
        self.finished = 0
        self.error: BaseException | None = None
        self.done = threading.Event()

    def work(self) -> None:
        # Claim chunks until none are left.  The caller runs this too, so an
        # unclaimed chunk can never be stranded behind a busy queue.
        while True:
            with self.lock:
                idx = self.next_chunk
                if idx >= self.nchunks:
                    return
                self.next_chunk = idx + 1
                skip = self.error is not None
            if not skip:
                lo = self.start + idx * self.chunk
                hi = min(lo + self.chunk, self.end)
                body = self.body
                try:
                    for i in range(lo, hi):
                        body(i)
                except BaseException as exc:  # noqa: BLE001
                    with self.lock:
                        if self.error is None:
                            self.error = exc
            with self.lock:
                self.finished += 1
                last = self.finished == self.nchunks
            if last:
                self.done.set()


def run_parallel_for(
    pool: Pool,
    rng: Range | tuple[int, int],
    body: Callable[[int], Any],
    chunk_hint: int | None = None,
) -> None:
    """Call ``body(i)`` once for every ``i`` in ``rng``, spread over the pool.

    The range is cut into chunks of ``chunk_hint`` indices (default
    ``max(1, n // (4 * workers))``); one task per chunk is submitted.  The
    calling thread claims chunks as well and only blocks for chunks that
    other workers are actively running.  The first exception raised by
    ``body`` is re-raised after every chunk has been claimed; chunks claimed
    after the failure are skipped.
    """
    if isinstance(rng, Range):
        start, end = rng.start, rng.end
    else:
        start, end = rng
    n = end - start
    if n <= 0:
        return
    if chunk_hint is None:
        chunk = max(1, n // (4 * pool.worker_count))
    else:
        if chunk_hint < 1:
            raise ValueError("chunk_hint must be positive")
        chunk = chunk_hint
    nchunks = -(-n // chunk)
    if nchunks == 1:
        for i in range(start, end):
            body(i)
        return
    job = _ForJob(start, end, chunk, nchunks, body)
    for _ in range(nchunks):
        pool.submit(job.work)
    job.work()
    job.done.wait()
    if job.error is not None:
        raise job.error


def par_do(pool: Pool, *thunks: Callable[[], Any]) -> list[Any]:
    """Run the thunks in parallel and return their results in order."""
    results: list[Any] = [None] * len(thunks)

    def body(i: int) -> None:
        results[i] = thunks[i]()

    run_parallel_for(pool, Range(0, len(thunks)), body, chunk_hint=1)
    return results


_SORT_GRAIN = 4096


def parallel_sort(pool: Pool, items: list[Any], key: Callable[[Any], Any] | None = None) -> None:
    """Stable in-place merge sort: sorted runs in parallel, then pairwise merges."""
    n = len(items)
    pieces = min(pool.worker_count, n // _SORT_GRAIN)
    if pieces < 2:
        items.sort(key=key)
        return
    step = -(-n // pieces)
    runs: list[list[Any]] = [items[i:i + step] for i in range(0, n, step)]

    def sort_run(i: int) -> None:
        runs[i].sort(key=key)

    run_parallel_for(pool, Range(0, len(runs)), sort_run, chunk_hint=1)
    while len(runs) > 1:
        pairs = [(runs[i], runs[i + 1]) for i in range(0, len(runs) - 1, 2)]
        merged: list[list[Any]] = [[] for _ in pairs]

        def merge_pair(i: int) -> None:
            a, b = pairs[i]
            merged[i] = list(heapq.merge(a, b, key=key))

        run_parallel_for(pool, Range(0, len(pairs)), merge_pair, chunk_hint=1)
        if len(runs) % 2:
            merged.append(runs[-1])
        runs = merged
    items[:] = runs[0]


def _is_sorted(seq: Sequence[Any], strict: bool) -> bool:
    if strict:
        return all(a < b for a, b in zip(seq, itertools.islice(seq, 1, None)))
    return all(not (b < a) for a, b in zip(seq, itertools.islice(seq, 1, None)))


def partition_by_pivots(
    pivots: Sequence[Any],
    items: Sequence[Any],
    key_of: Callable[[Any], Any] | None = None,
    *,
    check: bool = True,
) -> list[Range]:
    """Cut sorted ``items`` into ``len(pivots) + 1`` consecutive ranges.

    Range ``i`` holds the items with ``pivots[i-1] <= key < pivots[i]``
    (unbounded at both ends).
    """
    if check:
        if not _is_sorted(pivots, strict=True):
            raise ContractViolation("pivots must be strictly increasing")
        keys = items if key_of is None else [key_of(x) for x in items]
        if not _is_sorted(keys, strict=False):
            raise ContractViolation("items must be sorted by key")
    bounds = [0]
    lo = 0
    for p in pivots:
        lo = bisect.bisect_left(items, p, lo, key=key_of)
        bounds.append(lo)
    bounds.append(len(items))
    return [Range(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]
