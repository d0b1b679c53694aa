from __future__ import annotations

from typing import Any

from ..core import BatchedOp
from ..errors import UnsupportedOperation
from ..ops import Get, Incr
from ..substrate import Pool, Range, run_parallel_for


class Counter:
    """Plain sequential counter."""

    __slots__ = ("count",)

    def __init__(self, start: int = 0) -> None:
        self.count = start

    def incr(self) -> None:
        self.count += 1

    def get(self) -> int:
        return self.count

    def apply_op(self, op: Any) -> Any:
        if type(op) is Incr:
            self.count += 1
            return None
        if type(op) is Get:
            return self.count
        raise TypeError(f"counter does not support {op!r}")

    def keys(self) -> list[int]:
        return [self.count]


class BatchedCounter:
    """Counter whose batch executor sums increments with a parallel reduction.

    Every ``Get`` in a batch observes the value from before the batch: the
    gets linearise ahead of all increments of the same batch.
    """

    def __init__(self, start: int = 0, grain: int = 512) -> None:
        self.start = start
        self.grain = grain

    def init(self) -> Counter:
        return Counter(self.start)

    def run_batch(self, counter: Counter, pool: Pool, ops: list[BatchedOp]) -> None:
        before = counter.count
        n = len(ops)
        if n == 0:
            return
        nchunks = -(-n // self.grain)
        partial = [0] * nchunks

        def chunk(c: int) -> None:
            delta = 0
            for bop in ops[c * self.grain:(c + 1) * self.grain]:
                kind = type(bop.op)
                if kind is Incr:
                    bop.complete(None)
                    delta += 1
                elif kind is Get:
                    bop.complete(before)
                else:
                    bop.fail(UnsupportedOperation(f"counter does not support {bop.op!r}"))
            partial[c] = delta

        run_parallel_for(pool, Range(0, nchunks), chunk, chunk_hint=1)
        counter.count = before + sum(partial)
