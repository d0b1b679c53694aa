"""B-tree map with capacity-driven batch insertion.

Every node caches a capacity: a conservative count of how many new keys its
subtree can absorb before the node itself would have to split.  For a node
with ``free = 2t - 1 - len(keys)`` free slots::

    cap(leaf) = free
    cap(node) = (1 + min(cap(child) for child in children)) * free

A batch is routed down the tree.  Each child is handed at most its capacity,
children are processed in parallel, and whatever a child cannot take comes
back for another round.  A full child still owed keys is split first, while
its parent has room.  Only full nodes are ever split, so the ``t - 1`` lower
bound on key counts holds throughout.
"""

from __future__ import annotations

import bisect
import threading
from typing import Any, Sequence

from ..core import BatchedOp
from ..errors import ContractViolation, UnsupportedOperation
from ..ops import Insert, Search, apply_to_map
from ..substrate import Pool, Range, parallel_sort, run_parallel_for
from ..validation import Validation

__all__ = ["BTree", "BatchedBTree", "btree_capacity"]


class _Node:
    __slots__ = ("keys", "values", "children", "cap")

    def __init__(self, keys: list[Any] | None = None, values: list[Any] | None = None,
                 children: list[_Node] | None = None) -> None:
        self.keys: list[Any] = keys if keys is not None else []
        self.values: list[Any] = values if values is not None else []
        self.children = children
        self.cap: int | None = None

    @property
    def leaf(self) -> bool:
        return self.children is None

    def __repr__(self) -> str:
        return f"<btree node {self.keys}>"


def btree_capacity(node: _Node, t: int) -> int:
    """Capacity of ``node``, using and refreshing the per-node cache."""
    if node.cap is not None:
        return node.cap
    free = 2 * t - 1 - len(node.keys)
    if node.children is None:
        cap = free
    else:
        cap = (1 + min(btree_capacity(c, t) for c in node.children)) * free
    node.cap = cap
    return cap


def _fresh_capacity(node: _Node, t: int) -> int:
    """Capacity recomputed from scratch, ignoring every cache."""
    free = 2 * t - 1 - len(node.keys)
    if node.children is None:
        return free
    return (1 + min(_fresh_capacity(c, t) for c in node.children)) * free


class _Stats:
    __slots__ = ("lock", "splits", "root_splits", "max_keys_seen")

    def __init__(self) -> None:
        self.lock = threading.Lock()
        self.splits = 0
        self.root_splits = 0
        self.max_keys_seen = 0


class BTree:
    """B-tree map with minimum degree ``t`` (nodes hold ``t-1`` to ``2t-1`` keys)."""

    def __init__(self, t: int = 8, *, par_grain: int = 256) -> None:
        if t < 2:
            raise ValueError("minimum degree t must be >= 2")
        self.t = t
        self.root = _Node()
        self.par_grain = par_grain
        self.stats = _Stats()

    @property
    def max_keys(self) -> int:
        return 2 * self.t - 1

    def capacity(self, node: _Node | None = None) -> int:
        return btree_capacity(self.root if node is None else node, self.t)

    # -- sequential map interface -------------------------------------------

    def search(self, key: Any) -> Any:
        n = self.root
        while True:
            i = bisect.bisect_left(n.keys, key)
            if i < len(n.keys) and n.keys[i] == key:
                return n.values[i]
            if n.children is None:
                return None
            n = n.children[i]

    def __contains__(self, key: Any) -> bool:
        n = self.root
        while True:
            i = bisect.bisect_left(n.keys, key)
            if i < len(n.keys) and n.keys[i] == key:
                return True
            if n.children is None:
                return False
            n = n.children[i]

    def _note_size(self, n: _Node) -> None:
        size = len(n.keys)
        if size > self.max_keys:
            raise ContractViolation(f"node holds {size} keys, more than {self.max_keys}")
        if size > self.stats.max_keys_seen:
            with self.stats.lock:
                self.stats.max_keys_seen = max(self.stats.max_keys_seen, size)

    def _split_child(self, parent: _Node, i: int) -> None:
        """Split the full ``parent.children[i]`` around its median."""
        t = self.t
        child = parent.children[i]
        if len(child.keys) != 2 * t - 1:
            raise ContractViolation("only full nodes may be split")
        if len(parent.keys) >= 2 * t - 1:
            raise ContractViolation("cannot split a child of a full node")
        right = _Node(child.keys[t:], child.values[t:],
                      None if child.children is None else child.children[t:])
        parent.keys.insert(i, child.keys[t - 1])
        parent.values.insert(i, child.values[t - 1])
        parent.children.insert(i + 1, right)
        del child.keys[t - 1:]
        del child.values[t - 1:]
        if child.children is not None:
            del child.children[t:]
        child.cap = None
        parent.cap = None
        self._note_size(parent)
        with self.stats.lock:
            self.stats.splits += 1

    def _grow(self) -> None:
        old = self.root
        self.root = _Node(children=[old])
        self._split_child(self.root, 0)
        with self.stats.lock:
            self.stats.root_splits += 1

    def insert(self, key: Any, value: Any = None) -> None:
        if len(self.root.keys) == self.max_keys:
            self._grow()
        n = self.root
        while True:
            n.cap = None
            i = bisect.bisect_left(n.keys, key)
            if i < len(n.keys) and n.keys[i] == key:
                n.values[i] = value
                return
            if n.children is None:
                n.keys.insert(i, key)
                n.values.insert(i, value)
                self._note_size(n)
                return
            if len(n.children[i].keys) == self.max_keys:
                self._split_child(n, i)
                if key == n.keys[i]:
                    n.values[i] = value
                    return
                if n.keys[i] < key:
                    i += 1
            n = n.children[i]

    def delete(self, key: Any) -> None:
        raise UnsupportedOperation("B-tree deletion is not supported")

    def apply_op(self, op: Any) -> Any:
        return apply_to_map(self, op)

    def items(self) -> list[tuple[Any, Any]]:
        out: list[tuple[Any, Any]] = []

        def walk(n: _Node) -> None:
            if n.children is None:
                out.extend(zip(n.keys, n.values))
                return
            for i, c in enumerate(n.children):
                walk(c)
                if i < len(n.keys):
                    out.append((n.keys[i], n.values[i]))

        walk(self.root)
        return out

    def keys(self) -> list[Any]:
        return [k for k, _ in self.items()]

    def __len__(self) -> int:
        return len(self.items())

    def height(self) -> int:
        h, n = 1, self.root
        while n.children is not None:
            h, n = h + 1, n.children[0]
        return h

    # -- batched operations --------------------------------------------------

    def par_search(self, pool: Pool, queries: Sequence[BatchedOp]) -> None:
        """Answer ``Search`` ops, already sorted by key, against the current tree."""
        if queries:
            self._search_at(pool, self.root, list(queries))

    def _search_at(self, pool: Pool, n: _Node, queries: list[BatchedOp]) -> None:
        keys = n.keys
        routed: list[list[BatchedOp]] = [[] for _ in range(len(keys) + 1)]
        for bop in queries:
            k = bop.op.key
            i = bisect.bisect_left(keys, k)
            if i < len(keys) and keys[i] == k:
                bop.complete(n.values[i])
            elif n.children is None:
                bop.complete(None)
            else:
                routed[i].append(bop)
        if n.children is None:
            return
        work = [(n.children[i], qs) for i, qs in enumerate(routed) if qs]
        if len(work) > 1 and len(queries) >= self.par_grain:
            run_parallel_for(pool, Range(0, len(work)),
                             lambda j: self._search_at(pool, *work[j]), chunk_hint=1)
        else:
            for child, qs in work:
                self._search_at(pool, child, qs)

    def par_insert(self, pool: Pool, items: Sequence[tuple[Any, Any]]) -> None:
        """Insert ``(key, value)`` pairs sorted by key; the later of equal keys wins."""
        pending: list[tuple[Any, Any]] = []
        for kv in items:
            if pending and pending[-1][0] == kv[0]:
                pending[-1] = kv
            else:
                pending.append(kv)
        while pending:
            pending = self._insert_at(pool, self.root, pending)
            if pending:
                if len(self.root.keys) != self.max_keys:
                    raise ContractViolation("batch stalled below a root that is not full")
                self._grow()

    def _insert_at(self, pool: Pool, n: _Node, items: list[tuple[Any, Any]]) -> list[tuple[Any, Any]]:
        """Insert what fits under ``n``; returns the items that did not fit."""
        n.cap = None
        items = self._overwrite_here(n, items)
        if not items:
            return []
        if n.children is None:
            room = self.max_keys - len(n.keys)
            take, rest = items[:room], items[room:]
            if take:
                merged = sorted(list(zip(n.keys, n.values)) + take, key=lambda kv: kv[0])
                n.keys[:] = [k for k, _ in merged]
                n.values[:] = [v for _, v in merged]
                self._note_size(n)
            return rest

        t = self.t
        pending = items
        while pending:
            shares = self._route(n, pending)
            # split full children that are still owed keys, right to left so
            # that the indices of the remaining shares stay valid
            for i in range(len(shares) - 1, -1, -1):
                if shares[i] and len(n.children[i].keys) == self.max_keys and len(n.keys) < self.max_keys:
                    self._split_child(n, i)
            pending = self._overwrite_here(n, pending)
            shares = self._route(n, pending)
            work: list[tuple[_Node, list[tuple[Any, Any]]]] = []
            left_over: list[tuple[Any, Any]] = []
            for i, share in enumerate(shares):
                if not share:
                    continue
                cap = btree_capacity(n.children[i], t)
                if cap == 0:
                    left_over.extend(share)
                else:
                    work.append((n.children[i], share[:cap]))
                    left_over.extend(share[cap:])
            if not work:
                n.cap = None
                return left_over
            results: list[list[tuple[Any, Any]]] = [[] for _ in work]

            def run(j: int) -> None:
                results[j] = self._insert_at(pool, *work[j])

            if len(work) > 1 and sum(len(s) for _, s in work) >= self.par_grain:
                run_parallel_for(pool, Range(0, len(work)), run, chunk_hint=1)
            else:
                for j in range(len(work)):
                    run(j)
            for back in results:
                left_over.extend(back)
            left_over.sort(key=lambda kv: kv[0])
            pending = left_over
        n.cap = None
        return []

    @staticmethod
    def _overwrite_here(n: _Node, items: list[tuple[Any, Any]]) -> list[tuple[Any, Any]]:
        keys = n.keys
        if not keys:
            return items
        out = []
        for k, v in items:
            i = bisect.bisect_left(keys, k)
            if i < len(keys) and keys[i] == k:
                n.values[i] = v
            else:
                out.append((k, v))
        return out

    @staticmethod
    def _route(n: _Node, items: list[tuple[Any, Any]]) -> list[list[tuple[Any, Any]]]:
        shares: list[list[tuple[Any, Any]]] = []
        lo = 0
        for sep in n.keys:
            hi = bisect.bisect_left(items, sep, lo, key=lambda kv: kv[0])
            shares.append(items[lo:hi])
            lo = hi
        shares.append(items[lo:])
        return shares

    # -- validation ----------------------------------------------------------

    def validate(self) -> Validation:
        report = Validation()
        t = self.t
        leaf_depths: set[int] = set()

        def walk(n: _Node, lo: Any, hi: Any, depth: int, is_root: bool) -> None:
            size = len(n.keys)
            if size > 2 * t - 1:
                report.add(f"node {n.keys[:3]}... holds {size} keys, above {2 * t - 1}")
            if not is_root and size < t - 1:
                report.add(f"node {n.keys} holds {size} keys, below {t - 1}")
            if len(n.values) != size:
                report.add(f"node {n.keys}: {len(n.values)} values for {size} keys")
            if any(not a < b for a, b in zip(n.keys, n.keys[1:])):
                report.add(f"node {n.keys}: keys not strictly increasing")
            if n.keys and ((lo is not None and not lo < n.keys[0]) or (hi is not None and not n.keys[-1] < hi)):
                report.add(f"node {n.keys}: keys escape the interval ({lo!r}, {hi!r})")
            if n.cap is not None and n.cap != _fresh_capacity(n, t):
                report.add(f"node {n.keys}: cached capacity {n.cap}, recomputed {_fresh_capacity(n, t)}")
            if n.children is None:
                leaf_depths.add(depth)
                return
            if len(n.children) != size + 1:
                report.add(f"node {n.keys}: {len(n.children)} children for {size} keys")
                return
            if is_root and size == 0:
                report.add("interior root without keys")
            bounds = [lo, *n.keys, hi]
            for i, c in enumerate(n.children):
                walk(c, bounds[i], bounds[i + 1], depth + 1, False)

        walk(self.root, None, None, 0, True)
        if len(leaf_depths) > 1:
            report.add(f"leaves at different depths {sorted(leaf_depths)}")
        return report


class BatchedBTree:
    """Explicitly batched B-tree map supporting ``Search`` and ``Insert``.

    Searches see the tree as it was before the batch's inserts.
    """

    def __init__(self, t: int = 8, par_grain: int = 256) -> None:
        self.t = t
        self.par_grain = par_grain

    def init(self) -> BTree:
        return BTree(self.t, par_grain=self.par_grain)

    def run_batch(self, tree: BTree, pool: Pool, ops: list[BatchedOp]) -> None:
        searches: list[BatchedOp] = []
        inserts: list[BatchedOp] = []
        for bop in ops:
            kind = type(bop.op)
            if kind is Search:
                searches.append(bop)
            elif kind is Insert:
                inserts.append(bop)
            else:
                bop.fail(UnsupportedOperation(f"B-tree does not support {bop.op!r}"))
        if searches:
            parallel_sort(pool, searches, key=lambda b: b.op.key)
            tree.par_search(pool, searches)
        if inserts:
            items = [(b.op.key, b.op.value) for b in inserts]
            parallel_sort(pool, items, key=lambda kv: kv[0])
            tree.par_insert(pool, items)
            for bop in inserts:
                bop.complete(None)
