"""Y-fast trie: an x-fast trie of representatives over red-black buckets.

The bucket of representative ``r`` holds every key in ``[r, r')`` where
``r'`` is the next representative.  Representative 0 always exists, so every
key has a bucket.  A bucket that grows past ``2 * ceil(log2 u)`` keys is split
at its median, which becomes a new representative.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Any, Sequence

from ..errors import KeyOutOfRange
from ..ops import apply_to_set
from ..substrate import Range
from ..trees.rbtree import RBTree
from ..validation import Validation
from .xfast import XFastTrie

__all__ = ["YFastTrie"]


@dataclass(slots=True)
class _Touched:
    reps: set[int] = field(default_factory=set)
    lock: threading.Lock = field(default_factory=threading.Lock)


class YFastTrie:
    """Integer set over ``[0, universe)``; ``universe`` must be a power of two >= 2."""

    __slots__ = ("universe", "bits", "threshold", "top", "buckets", "sizes")

    def __init__(self, universe: int) -> None:
        self.top = XFastTrie(universe)
        self.universe = universe
        self.bits = self.top.bits
        self.threshold = 2 * math.ceil(math.log2(universe))
        self.buckets: dict[int, RBTree] = {0: RBTree()}
        self.sizes: dict[int, int] = {0: 0}
        self.top.insert(0)

    def _check(self, key: int) -> None:
        if not 0 <= key < self.universe:
            raise KeyOutOfRange(f"key {key} outside universe [0, {self.universe})")

    def rep_of(self, key: int) -> int:
        return self.top.floor(key)

    # -- sequential set interface -------------------------------------------

    def mem(self, key: int) -> bool:
        self._check(key)
        return key in self.buckets[self.rep_of(key)]

    __contains__ = mem

    def _add(self, key: int) -> int:
        r = self.rep_of(key)
        if self.buckets[r].insert(key):
            self.sizes[r] += 1
        return r

    def insert(self, key: int) -> None:
        self._check(key)
        r = self._add(key)
        if self.sizes[r] > self.threshold:
            self._split(r)

    def delete(self, key: int) -> None:
        self._check(key)
        r = self.rep_of(key)
        if not self.buckets[r].delete(key):
            return
        self.sizes[r] -= 1
        if self.sizes[r] == 0 and r != 0:
            del self.buckets[r]
            del self.sizes[r]
            self.top.delete(r)

    def _split(self, r: int) -> None:
        """Halve bucket ``r`` at its median until every piece fits."""
        pending = [r]
        while pending:
            r = pending.pop()
            size = self.sizes[r]
            if size <= self.threshold:
                continue
            keys = self.buckets[r].keys()
            m = keys[size // 2]
            low, high = self.buckets[r].split(m)
            self.buckets[r], self.buckets[m] = low, high
            self.sizes[r], self.sizes[m] = size // 2, size - size // 2
            self.top.insert(m)
            pending.extend((r, m))

    def successor(self, key: int) -> int | None:
        self._check(key)
        r = self.rep_of(key)
        s = self.buckets[r].successor(key)
        if s is not None:
            return s
        nxt = self.top.successor(r)
        return None if nxt is None else self.buckets[nxt].min_key()

    def predecessor(self, key: int) -> int | None:
        self._check(key)
        r = self.rep_of(key)
        p = self.buckets[r].predecessor(key)
        while p is None:
            r = self.top.predecessor(r)
            if r is None:
                return None
            if self.buckets[r]:
                p = self.buckets[r].max_key()
        return p

    def apply_op(self, op: Any) -> Any:
        return apply_to_set(self, op)

    def keys(self) -> list[int]:
        out: list[int] = []
        for r in self.top.keys():
            out.extend(self.buckets[r].keys())
        return out

    def __len__(self) -> int:
        return sum(self.sizes.values())

    # -- expose / repair ---------------------------------------------------

    def expose(self, seeds: Sequence[int]) -> tuple[list[int], _Touched]:
        """Pivots are the seeds' representatives; nothing is modified."""
        return sorted({self.rep_of(s) for s in seeds}), _Touched()

    def insert_range(self, keys: Sequence[int], aux: _Touched, rng: Range) -> None:
        """Insert into buckets only; oversized buckets are left for ``repair``."""
        touched = set()
        for i in range(rng.start, rng.end):
            touched.add(self._add(keys[i]))
        with aux.lock:
            aux.reps |= touched

    def repair(self, aux: _Touched) -> None:
        for r in sorted(aux.reps):
            if self.sizes[r] > self.threshold:
                self._split(r)

    # -- validation ----------------------------------------------------------

    def validate(self) -> Validation:
        report = Validation()
        top = self.top.validate()
        for p in top.problems:
            report.add(f"representative trie: {p}")
        reps = self.top.keys()
        if not reps or reps[0] != 0:
            report.add("representative 0 is missing")
        if set(reps) != set(self.buckets) or set(reps) != set(self.sizes):
            report.add("representatives, buckets and sizes disagree")
            return report
        for i, r in enumerate(reps):
            tree = self.buckets[r]
            check = tree.validate()
            for p in check.problems:
                report.add(f"bucket {r}: {p}")
            keys = tree.keys()
            if len(keys) != self.sizes[r]:
                report.add(f"bucket {r}: size {self.sizes[r]} recorded, {len(keys)} stored")
            if len(keys) > self.threshold:
                report.add(f"bucket {r}: {len(keys)} keys exceed the threshold {self.threshold}")
            if r != 0 and not keys:
                report.add(f"bucket {r}: empty bucket for a non-zero representative")
            end = reps[i + 1] if i + 1 < len(reps) else self.universe
            if keys and not (r <= keys[0] and keys[-1] < end):
                report.add(f"bucket {r}: keys {keys[0]}..{keys[-1]} outside [{r}, {end})")
        return report
