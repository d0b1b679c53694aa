"""Expose-repair batch executor for integer-key sets.

The structure is asked to ``expose`` a set of pivots splitting the universe
into chunks whose updates do not interfere.  Sorted insert slices are then
written into the same structure in parallel via ``insert_range``, and a final
``repair`` restores whatever global metadata the slices left stale.
"""

from __future__ import annotations

from typing import Any, Callable, Protocol, Sequence

from .core import BatchedOp
from .errors import KeyOutOfRange, UnsupportedOperation
from .ops import Insert, Mem, Predecessor, Successor
from .splitjoin import ExecutorConfig, choose_seeds
from .substrate import Pool, Range, parallel_sort, partition_by_pivots, run_parallel_for

__all__ = ["ExposeRepair", "ExposeRepairSet", "ExecutorConfig"]


class ExposeRepairSet(Protocol):
    universe: int

    def mem(self, key: int) -> bool: ...

    def insert(self, key: int) -> None: ...

    def predecessor(self, key: int) -> int | None: ...

    def successor(self, key: int) -> int | None: ...

    def expose(self, seeds: Sequence[int]) -> tuple[list[int], Any]: ...

    def insert_range(self, keys: Sequence[int], aux: Any, rng: Range) -> None: ...

    def repair(self, aux: Any) -> None: ...


_QUERIES = {
    Mem: lambda s, k: s.mem(k),
    Predecessor: lambda s, k: s.predecessor(k),
    Successor: lambda s, k: s.successor(k),
}


class ExposeRepair:
    """Explicitly batched set over any structure implementing :class:`ExposeRepairSet`.

    ``Mem``, ``Predecessor`` and ``Successor`` see the set as it was before
    the batch; ``Insert`` requests are acknowledged once the batch's inserts
    have been applied.  Keys outside ``[0, universe)`` fail with
    :class:`KeyOutOfRange`; other operations with :class:`UnsupportedOperation`.
    """

    def __init__(self, make_set: Callable[[], ExposeRepairSet], config: ExecutorConfig | None = None) -> None:
        self.make_set = make_set
        self.config = config or ExecutorConfig()
        self.parallel_rounds = 0

    def init(self) -> ExposeRepairSet:
        return self.make_set()

    def run_batch(self, s: ExposeRepairSet, pool: Pool, ops: list[BatchedOp]) -> None:
        u = s.universe
        queries: list[BatchedOp] = []
        inserts: list[BatchedOp] = []
        for bop in ops:
            kind = type(bop.op)
            if kind not in _QUERIES and kind is not Insert:
                bop.fail(UnsupportedOperation(f"expose-repair sets do not support {bop.op!r}"))
                continue
            key = bop.op.key
            if not (isinstance(key, int) and 0 <= key < u):
                bop.fail(KeyOutOfRange(f"key {key!r} outside universe [0, {u})"))
            elif kind is Insert:
                inserts.append(bop)
            else:
                queries.append(bop)

        if queries:
            def answer(i: int) -> None:
                bop = queries[i]
                bop.complete(_QUERIES[type(bop.op)](s, bop.op.key))

            run_parallel_for(pool, Range(0, len(queries)), answer)
        if inserts:
            self.par_insert(pool, s, [bop.op.key for bop in inserts])
            for bop in inserts:
                bop.complete(None)

    def par_insert(self, pool: Pool, s: ExposeRepairSet, keys: list[int]) -> None:
        n = len(keys)
        seq = self.config.seq_threshold
        if n < seq:
            for k in keys:
                s.insert(k)
            return

        seeds = sorted(choose_seeds(keys, n // seq + 1))
        pivots, aux = s.expose(seeds)
        batch = list(keys)
        parallel_sort(pool, batch)
        ranges = partition_by_pivots(pivots, batch, check=False)
        busy = [r for r in ranges if r.start < r.end]
        if len(busy) > 1:
            self.parallel_rounds += 1

        def fill(i: int) -> None:
            s.insert_range(batch, aux, busy[i])

        run_parallel_for(pool, Range(0, len(busy)), fill, chunk_hint=1)
        s.repair(aux)
