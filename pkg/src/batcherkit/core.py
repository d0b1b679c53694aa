"""Implicit batching: a direct-style concurrent front end for batched structures.

A structure only has to provide ``init()`` and ``run_batch(data, pool, ops)``.
:func:`wrap` turns it into a :class:`BatchedStructure` whose ``apply`` can be
awaited from any number of concurrent pool tasks::

    with Pool(8) as pool:
        counter = wrap(BatchedCounter(), pool)

        async def visit():
            await counter.apply(Incr())
            return await counter.apply(Get())

        pool.run(visit())

Clients push their request into a per-structure container and try to become
the batch executor.  Whoever wins the running flag drains the container and
calls ``run_batch``; everyone else suspends on their own cell.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass
from typing import Any, Callable, Protocol

from .errors import BatchFailed, PoolClosed
from .substrate import DeferredCell, Pool

__all__ = [
    "BatchedOp",
    "BatchedStructure",
    "ExplicitlyBatched",
    "LaunchConfig",
    "RequestContainer",
    "wrap",
]

log = logging.getLogger(__name__)


class BatchedOp:
    """An operation descriptor paired with its completion callbacks.

    ``complete`` must be called exactly once per op, or ``fail`` instead.
    """

    __slots__ = ("op", "_on_result", "_on_error", "done")

    def __init__(
        self,
        op: Any,
        on_result: Callable[[Any], None],
        on_error: Callable[[BaseException], None] | None = None,
    ) -> None:
        self.op = op
        self._on_result = on_result
        self._on_error = on_error
        self.done = False

    def complete(self, result: Any = None) -> None:
        self.done = True
        self._on_result(result)

    def fail(self, exc: BaseException) -> None:
        self.done = True
        if self._on_error is None:
            self._on_result(exc)
        else:
            self._on_error(exc)

    def __repr__(self) -> str:
        return f"BatchedOp({self.op!r})"


class ExplicitlyBatched(Protocol):
    def init(self) -> Any: ...

    def run_batch(self, data: Any, pool: Pool, ops: list[BatchedOp]) -> None: ...


class RequestContainer:
    """Unordered multi-producer bag with an all-at-once drain.

    ``push`` appends one element; ``pop_all`` swaps the whole contents out in
    a single step, so an element pushed concurrently lands either in the
    returned list or in the container, never both and never neither.
    """

    __slots__ = ("_items", "_lock")

    def __init__(self) -> None:
        self._items: list[BatchedOp] = []
        self._lock = threading.Lock()

    def push(self, op: BatchedOp) -> None:
        with self._lock:
            self._items.append(op)

    def pop_all(self) -> list[BatchedOp]:
        with self._lock:
            items, self._items = self._items, []
        return items

    def is_empty(self) -> bool:
        return not self._items

    def __len__(self) -> int:
        return len(self._items)


@dataclass(frozen=True, slots=True)
class LaunchConfig:
    """Batch launch policy.

    A batch is started early only once ``min_batch`` requests are pending;
    otherwise the structure waits at most ``wait_threshold`` seconds since the
    previous run before launching whatever is there.
    """

    min_batch: int = 1
    wait_threshold: float = 0.001

    def __post_init__(self) -> None:
        if self.min_batch < 1:
            raise ValueError("min_batch must be >= 1")
        if not self.wait_threshold > 0:
            raise ValueError("wait_threshold must be > 0")


class BatchedStructure:
    """Direct-style concurrent wrapper around an explicitly batched structure."""

    def __init__(self, impl: ExplicitlyBatched, pool: Pool, config: LaunchConfig | None = None) -> None:
        self.impl = impl
        self.pool = pool
        self.config = config or LaunchConfig()
        self.data = impl.init()
        self.container = RequestContainer()
        self._running = threading.Lock()
        self._retry_pending = threading.Lock()
        self.last_run = time.monotonic()
        # instrumentation; only written by the batch executor (or under _retry_pending)
        self.batches_run = 0
        self.ops_run = 0
        self.retries_scheduled = 0

    @property
    def is_running(self) -> bool:
        return self._running.locked()

    async def apply(self, op: Any) -> Any:
        """Submit ``op`` and suspend until its batch has executed it."""
        cell: DeferredCell[Any] = DeferredCell()
        self.container.push(BatchedOp(op, cell.resolve, cell.fail))
        try:
            self.try_launch()
        except Exception:
            # Already delivered to every op of the failed batch through its cell.
            pass
        return await cell

    def try_launch(self) -> None:
        container = self.container
        if container.is_empty():
            return
        cfg = self.config
        now = time.monotonic()
        if len(container) < cfg.min_batch and now - self.last_run < cfg.wait_threshold:
            self._schedule_retry(cfg.wait_threshold - (now - self.last_run))
            return
        if not self._running.acquire(blocking=False):
            return
        try:
            batch = container.pop_all()
            self.last_run = time.monotonic()
            if batch:
                self.batches_run += 1
                self.ops_run += len(batch)
                try:
                    self.impl.run_batch(self.data, self.pool, batch)
                except BaseException as exc:
                    log.exception("run_batch failed on a batch of %d ops", len(batch))
                    err = BatchFailed(f"batch executor raised {exc!r}")
                    err.__cause__ = exc
                    for bop in batch:
                        if not bop.done:
                            bop.fail(err)
                    raise
        finally:
            self._running.release()
            # Requests pushed while we were running may have found the flag
            # taken; re-check on a fresh task so they are not stranded.
            try:
                self.pool.submit(self.try_launch)
            except PoolClosed:
                pass

    def idle(self) -> bool:
        """True when no batch is running and no request is waiting."""
        return not self._running.locked() and self.container.is_empty()

    def wait_idle(self, timeout: float | None = None, poll: float = 0.0005) -> bool:
        """Block a non-pool thread until :meth:`idle`; False on timeout.

        Operations may be acknowledged before their batch has finished
        mutating the structure, so call this before inspecting ``data``.
        """
        deadline = None if timeout is None else time.monotonic() + timeout
        while not self.idle():
            if deadline is not None and time.monotonic() > deadline:
                return False
            time.sleep(poll)
        return True

    def _schedule_retry(self, delay: float) -> None:
        if not self._retry_pending.acquire(blocking=False):
            return
        self.retries_scheduled += 1
        self.pool.submit_after(delay, self._retry)

    def _retry(self) -> None:
        self._retry_pending.release()
        self.try_launch()

    def __repr__(self) -> str:
        return f"BatchedStructure({type(self.impl).__name__}, pending={len(self.container)})"


def wrap(impl: ExplicitlyBatched, pool: Pool, config: LaunchConfig | None = None) -> BatchedStructure:
    return BatchedStructure(impl, pool, config)
