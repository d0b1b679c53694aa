"""Skip list set with a three-stage batch insert.

Stage 1 sorts and deduplicates the batch, drops keys that are already
present, gives every new node a random level and links the new nodes into
an intermediary skip list of their own, remembering for each node and level
the previous new node (its back pointer).

Stage 2 searches the original list, read-only and in parallel, for every
new node's per-level predecessors.  A new node whose original successor at
some level comes before its intermediary successor is pointed at the
original one instead.

Stage 3 walks the new nodes in order and splices them in: at each level the
node is linked from whichever is closer, its original predecessor or its
back pointer.  The merge is sequential.
"""

from __future__ import annotations

import math
import random
from typing import Any, Sequence

from ..core import BatchedOp
from ..errors import UnsupportedOperation
from ..ops import Insert, Mem, Predecessor, Successor, apply_to_set
from ..substrate import Pool, Range, parallel_sort, run_parallel_for
from ..validation import Validation

__all__ = ["BatchedSkipList", "SkipList"]


class _Node:
    __slots__ = ("key", "forward")

    def __init__(self, key: Any, level: int) -> None:
        self.key = key
        self.forward: list[_Node | None] = [None] * level

    def __repr__(self) -> str:
        return f"<skip {self.key!r} x{len(self.forward)}>"


class SkipList:
    """Sorted set.  Levels are geometric with p = 1/2, capped at ``ceil(log2(expected_size))``."""

    def __init__(self, expected_size: int = 1 << 20, seed: int | None = None) -> None:
        self.max_level = max(1, math.ceil(math.log2(max(2, expected_size))))
        self.head = _Node(None, self.max_level)
        self.rng = random.Random(seed)
        self.size = 0

    def random_level(self) -> int:
        level = 1
        bits = self.rng.getrandbits(self.max_level)
        while level < self.max_level and bits & 1:
            level += 1
            bits >>= 1
        return level

    def _preds(self, key: Any) -> list[_Node]:
        """Per level, the last node with a key below ``key`` (the head if none)."""
        preds: list[_Node] = [self.head] * self.max_level
        x = self.head
        for lvl in range(self.max_level - 1, -1, -1):
            nxt = x.forward[lvl]
            while nxt is not None and nxt.key < key:
                x, nxt = nxt, nxt.forward[lvl]
            preds[lvl] = x
        return preds

    def _last_below(self, key: Any) -> _Node:
        x = self.head
        for lvl in range(self.max_level - 1, -1, -1):
            nxt = x.forward[lvl]
            while nxt is not None and nxt.key < key:
                x, nxt = nxt, nxt.forward[lvl]
        return x

    # -- sequential set interface -------------------------------------------

    def mem(self, key: Any) -> bool:
        nxt = self._last_below(key).forward[0]
        return nxt is not None and nxt.key == key

    __contains__ = mem

    def insert(self, key: Any) -> None:
        preds = self._preds(key)
        nxt = preds[0].forward[0]
        if nxt is not None and nxt.key == key:
            return
        node = _Node(key, self.random_level())
        for lvl in range(len(node.forward)):
            node.forward[lvl] = preds[lvl].forward[lvl]
            preds[lvl].forward[lvl] = node
        self.size += 1

    def delete(self, key: Any) -> None:
        preds = self._preds(key)
        node = preds[0].forward[0]
        if node is None or node.key != key:
            return
        for lvl in range(len(node.forward)):
            if preds[lvl].forward[lvl] is node:
                preds[lvl].forward[lvl] = node.forward[lvl]
        self.size -= 1

    def successor(self, key: Any) -> Any:
        x = self._last_below(key).forward[0]
        while x is not None and not key < x.key:
            x = x.forward[0]
        return None if x is None else x.key

    def predecessor(self, key: Any) -> Any:
        x = self._last_below(key)
        return None if x is self.head else x.key

    def apply_op(self, op: Any) -> Any:
        return apply_to_set(self, op)

    def keys(self) -> list[Any]:
        out = []
        x = self.head.forward[0]
        while x is not None:
            out.append(x.key)
            x = x.forward[0]
        return out

    def __len__(self) -> int:
        return self.size

    def checksum(self) -> int:
        """Hash of the link structure; changes whenever any pointer changes."""
        h = hash(tuple(id(f) for f in self.head.forward))
        x = self.head.forward[0]
        while x is not None:
            h = hash((h, id(x), x.key, tuple(id(f) for f in x.forward)))
            x = x.forward[0]
        return h

    # -- batch insert --------------------------------------------------------

    def batch_insert(self, pool: Pool, keys: Sequence[Any]) -> None:
        """Insert ``keys`` using the three-stage procedure."""
        nodes, back = self._stage_build(pool, keys)
        if not nodes:
            return
        orig_preds = self._stage_search(pool, nodes)
        self._stage_merge(nodes, back, orig_preds)

    def _stage_build(self, pool: Pool, keys: Sequence[Any]) -> tuple[list[_Node], list[list[_Node | None]]]:
        batch = list(keys)
        parallel_sort(pool, batch)
        uniq = [k for i, k in enumerate(batch) if i == 0 or batch[i - 1] != k]
        fresh = [True] * len(uniq)

        def probe(i: int) -> None:
            fresh[i] = not self.mem(uniq[i])

        run_parallel_for(pool, Range(0, len(uniq)), probe)
        nodes = [_Node(k, self.random_level()) for k, f in zip(uniq, fresh) if f]

        back: list[list[_Node | None]] = [[None] * len(n.forward) for n in nodes]
        last: list[_Node | None] = [None] * self.max_level
        for i, node in enumerate(nodes):
            for lvl in range(len(node.forward)):
                prev = last[lvl]
                back[i][lvl] = prev
                if prev is not None:
                    prev.forward[lvl] = node
                last[lvl] = node
        return nodes, back

    def _stage_search(self, pool: Pool, nodes: list[_Node]) -> list[list[_Node]]:
        orig_preds: list[list[_Node]] = [[] for _ in nodes]

        def locate(i: int) -> None:
            node = nodes[i]
            preds = self._preds(node.key)
            height = len(node.forward)
            orig_preds[i] = preds[:height]
            for lvl in range(height):
                orig = preds[lvl].forward[lvl]
                mine = node.forward[lvl]
                if orig is not None and (mine is None or orig.key < mine.key):
                    node.forward[lvl] = orig

        run_parallel_for(pool, Range(0, len(nodes)), locate)
        return orig_preds

    def _stage_merge(self, nodes: list[_Node], back: list[list[_Node | None]],
                     orig_preds: list[list[_Node]]) -> None:
        head = self.head
        for i, node in enumerate(nodes):
            for lvl in range(len(node.forward)):
                b = back[i][lvl]
                o = orig_preds[i][lvl]
                if b is None or (o is not head and b.key < o.key):
                    o.forward[lvl] = node
        self.size += len(nodes)

    # -- validation ----------------------------------------------------------

    def validate(self) -> Validation:
        report = Validation()
        levels: list[list[_Node]] = []
        for lvl in range(self.max_level):
            row = []
            x = self.head.forward[lvl]
            while x is not None:
                if len(x.forward) <= lvl:
                    report.add(f"node {x.key!r} of height {len(x.forward)} linked at level {lvl}")
                    return report
                row.append(x)
                x = x.forward[lvl]
                if len(row) > self.size + 1:
                    report.add(f"level {lvl} does not terminate")
                    return report
            levels.append(row)
            if any(not a.key < b.key for a, b in zip(row, row[1:])):
                report.add(f"level {lvl} is not strictly sorted")
        for lvl in range(1, self.max_level):
            below = {id(n) for n in levels[lvl - 1]}
            if any(id(n) not in below for n in levels[lvl]):
                report.add(f"level {lvl} is not a sub-list of level {lvl - 1}")
            tall = [n for n in levels[lvl - 1] if len(n.forward) > lvl]
            if [id(n) for n in tall] != [id(n) for n in levels[lvl]]:
                report.add(f"level {lvl} skips nodes tall enough to appear on it")
        if len(levels[0]) != self.size:
            report.add(f"size {self.size} recorded, {len(levels[0])} nodes at level 0")
        return report


_QUERIES = {
    Mem: lambda s, k: s.mem(k),
    Predecessor: lambda s, k: s.predecessor(k),
    Successor: lambda s, k: s.successor(k),
}


class BatchedSkipList:
    """Explicitly batched skip list set.

    Queries of a batch run first, in parallel, against the pre-batch list;
    then the batch's inserts are merged in.
    """

    def __init__(self, expected_size: int = 1 << 20, seed: int | None = 0) -> None:
        self.expected_size = expected_size
        self.seed = seed

    def init(self) -> SkipList:
        return SkipList(self.expected_size, self.seed)

    def run_batch(self, sl: SkipList, pool: Pool, ops: list[BatchedOp]) -> None:
        queries: list[BatchedOp] = []
        inserts: list[BatchedOp] = []
        for bop in ops:
            kind = type(bop.op)
            if kind in _QUERIES:
                queries.append(bop)
            elif kind is Insert:
                inserts.append(bop)
            else:
                bop.fail(UnsupportedOperation(f"skip list does not support {bop.op!r} in a batch"))
        if queries:
            def answer(i: int) -> None:
                bop = queries[i]
                bop.complete(_QUERIES[type(bop.op)](sl, bop.op.key))

            run_parallel_for(pool, Range(0, len(queries)), answer)
        if inserts:
            sl.batch_insert(pool, [b.op.key for b in inserts])
            for bop in inserts:
                bop.complete(None)
