"""Van Emde Boas tree over a power-of-two universe.

A node over ``2**bits`` keys keeps ``min`` out of its clusters, ``max`` as
plain metadata, ``2**ceil(bits/2)`` clusters of ``2**floor(bits/2)`` keys
each, and a summary over the cluster indices.  Clusters and summaries are
allocated on first use; ``None`` stands for an empty one.
"""

from __future__ import annotations

from typing import Any, Iterator, Sequence

from ..errors import KeyOutOfRange
from ..ops import apply_to_set
from ..substrate import Range
from ..validation import Validation

__all__ = ["VEBTree"]


class _Node:
    __slots__ = ("bits", "lo_bits", "min", "max", "summary", "cluster")

    def __init__(self, bits: int) -> None:
        self.bits = bits
        self.min: int | None = None
        self.max: int | None = None
        self.summary: _Node | None = None
        if bits > 1:
            self.lo_bits = bits // 2
            self.cluster: list[_Node | None] = [None] * (1 << (bits - self.lo_bits))
        else:
            self.lo_bits = 0
            self.cluster = []


def _member(v: _Node | None, x: int) -> bool:
    while v is not None:
        if x == v.min or x == v.max:
            return True
        if v.bits == 1:
            return False
        v, x = v.cluster[x >> v.lo_bits], x & ((1 << v.lo_bits) - 1)
    return False


def _insert_into(v: _Node, x: int) -> None:
    if v.min is None:
        v.min = v.max = x
        return
    if x == v.min:
        return
    if x < v.min:
        x, v.min = v.min, x
    if v.bits > 1:
        h, lo = x >> v.lo_bits, x & ((1 << v.lo_bits) - 1)
        c = v.cluster[h]
        if c is None:
            c = v.cluster[h] = _Node(v.lo_bits)
        if c.min is None:
            if v.summary is None:
                v.summary = _Node(v.bits - v.lo_bits)
            _insert_into(v.summary, h)
            c.min = c.max = lo
        else:
            _insert_into(c, lo)
    if x > v.max:
        v.max = x


def _delete_from(v: _Node, x: int) -> None:
    """Remove ``x``, which must be present."""
    if v.min == v.max:
        v.min = v.max = None
        return
    if v.bits == 1:
        v.min = v.max = 1 - x
        return
    lo_bits = v.lo_bits
    if x == v.min:
        first = v.summary.min
        x = (first << lo_bits) | v.cluster[first].min
        v.min = x
    h, lo = x >> lo_bits, x & ((1 << lo_bits) - 1)
    c = v.cluster[h]
    _delete_from(c, lo)
    if c.min is None:
        v.cluster[h] = None
        _delete_from(v.summary, h)
        if v.summary.min is None:
            v.summary = None
        if x == v.max:
            if v.summary is None:
                v.max = v.min
            else:
                top = v.summary.max
                v.max = (top << lo_bits) | v.cluster[top].max
    elif x == v.max:
        v.max = (h << lo_bits) | c.max


def _successor(v: _Node | None, x: int) -> int | None:
    if v is None or v.min is None:
        return None
    if v.bits == 1:
        return 1 if x == 0 and v.max == 1 else None
    if x < v.min:
        return v.min
    lo_bits = v.lo_bits
    h, lo = x >> lo_bits, x & ((1 << lo_bits) - 1)
    c = v.cluster[h]
    if c is not None and c.max is not None and lo < c.max:
        return (h << lo_bits) | _successor(c, lo)
    nxt = _successor(v.summary, h)
    if nxt is None:
        return None
    return (nxt << lo_bits) | v.cluster[nxt].min


def _predecessor(v: _Node | None, x: int) -> int | None:
    if v is None or v.min is None:
        return None
    if v.bits == 1:
        return 0 if x == 1 and v.min == 0 else None
    if x > v.max:
        return v.max
    lo_bits = v.lo_bits
    h, lo = x >> lo_bits, x & ((1 << lo_bits) - 1)
    c = v.cluster[h]
    if c is not None and c.min is not None and lo > c.min:
        return (h << lo_bits) | _predecessor(c, lo)
    prv = _predecessor(v.summary, h)
    if prv is None:
        return v.min if x > v.min else None
    return (prv << lo_bits) | v.cluster[prv].max


def _keys(v: _Node | None) -> Iterator[int]:
    if v is None or v.min is None:
        return
    yield v.min
    if v.bits == 1:
        if v.max != v.min:
            yield v.max
        return
    for h, c in enumerate(v.cluster):
        if c is not None:
            base = h << v.lo_bits
            for lo in _keys(c):
                yield base | lo


class VEBTree:
    """Integer set over ``[0, universe)``; ``universe`` must be a power of two >= 2."""

    __slots__ = ("universe", "bits", "root")

    def __init__(self, universe: int) -> None:
        if universe < 2 or universe & (universe - 1):
            raise ValueError(f"universe must be a power of two >= 2, got {universe}")
        self.universe = universe
        self.bits = universe.bit_length() - 1
        self.root = _Node(self.bits)

    def _check(self, key: int) -> None:
        if not 0 <= key < self.universe:
            raise KeyOutOfRange(f"key {key} outside universe [0, {self.universe})")

    # -- sequential set interface -------------------------------------------

    def mem(self, key: int) -> bool:
        self._check(key)
        return _member(self.root, key)

    __contains__ = mem

    def insert(self, key: int) -> None:
        self._check(key)
        _insert_into(self.root, key)

    def delete(self, key: int) -> None:
        self._check(key)
        if _member(self.root, key):
            _delete_from(self.root, key)

    def successor(self, key: int) -> int | None:
        self._check(key)
        return _successor(self.root, key)

    def predecessor(self, key: int) -> int | None:
        self._check(key)
        return _predecessor(self.root, key)

    def min(self) -> int | None:
        return self.root.min

    def max(self) -> int | None:
        return self.root.max

    def apply_op(self, op: Any) -> Any:
        return apply_to_set(self, op)

    def keys(self) -> list[int]:
        return list(_keys(self.root))

    def __len__(self) -> int:
        return sum(1 for _ in _keys(self.root))

    # -- expose / repair ---------------------------------------------------

    def expose(self, seeds: Sequence[int]) -> tuple[list[int], bool]:
        """Pivots are the first keys of the root clusters the seeds fall in.

        Nothing is modified.  The returned flag marks a base-case root, whose
        only chunk is inserted through the ordinary path.
        """
        root = self.root
        if root.bits == 1:
            return [], True
        lo_bits = root.lo_bits
        pivots = sorted({(s >> lo_bits) << lo_bits for s in seeds})
        return pivots, False

    def insert_range(self, keys: Sequence[int], aux: bool, rng: Range) -> None:
        """Insert ``keys[rng]`` into root clusters only; root metadata goes stale."""
        root = self.root
        if aux:
            for i in range(rng.start, rng.end):
                _insert_into(root, keys[i])
            return
        lo_bits = root.lo_bits
        mask = (1 << lo_bits) - 1
        cluster = root.cluster
        for i in range(rng.start, rng.end):
            k = keys[i]
            if k == root.min:
                continue
            h = k >> lo_bits
            c = cluster[h]
            if c is None:
                c = cluster[h] = _Node(lo_bits)
            _insert_into(c, k & mask)

    def repair(self, aux: bool) -> None:
        """Restore root ``min``, ``max`` and summary after ``insert_range`` calls."""
        root = self.root
        if aux:
            return
        lo_bits = root.lo_bits
        cluster = root.cluster
        live = [h for h, c in enumerate(cluster) if c is not None and c.min is not None]
        if live:
            first = live[0]
            cand = (first << lo_bits) | cluster[first].min
            if root.min is None or cand < root.min:
                old = root.min
                _delete_from(cluster[first], cluster[first].min)
                if cluster[first].min is None:
                    cluster[first] = None
                    live.pop(0)
                root.min = cand
                if old is not None:
                    h = old >> lo_bits
                    c = cluster[h]
                    if c is None:
                        c = cluster[h] = _Node(lo_bits)
                    if c.min is None:
                        live.append(h)
                        live.sort()
                    _insert_into(c, old & ((1 << lo_bits) - 1))
        if live:
            top = live[-1]
            root.max = (top << lo_bits) | cluster[top].max
        else:
            root.max = root.min
        for h, c in enumerate(cluster):
            if c is not None and c.min is None:
                cluster[h] = None
        live_set = set(live)
        summary = root.summary
        if summary is not None:
            for h in list(_keys(summary)):
                if h not in live_set:
                    _delete_from(summary, h)
            if summary.min is None:
                root.summary = summary = None
        if live:
            if summary is None:
                summary = root.summary = _Node(root.bits - lo_bits)
            for h in live:
                _insert_into(summary, h)

    # -- validation ----------------------------------------------------------

    def validate(self) -> Validation:
        report = Validation()
        _validate_node(self.root, report, "root")
        return report


def _validate_node(v: _Node, report: Validation, where: str) -> list[int]:
    """Check ``v`` recursively; returns its sorted keys."""
    if (v.min is None) != (v.max is None):
        report.add(f"{where}: min/max emptiness disagree ({v.min!r}, {v.max!r})")
        return []
    if v.bits == 1:
        if v.cluster or v.summary is not None:
            report.add(f"{where}: base case carries clusters or a summary")
        if v.min is None:
            return []
        if v.min not in (0, 1) or v.max not in (0, 1) or v.min > v.max:
            report.add(f"{where}: bad base-case min/max ({v.min}, {v.max})")
        return sorted({v.min, v.max})
    lo_bits = v.lo_bits
    if len(v.cluster) != 1 << (v.bits - lo_bits):
        report.add(f"{where}: wrong cluster count {len(v.cluster)}")
    below: list[int] = []
    live: list[int] = []
    for h, c in enumerate(v.cluster):
        if c is None:
            continue
        if c.bits != lo_bits:
            report.add(f"{where}: cluster {h} has {c.bits} bits, expected {lo_bits}")
            continue
        sub = _validate_node(c, report, f"{where}.cluster[{h}]")
        if sub:
            live.append(h)
            below.extend((h << lo_bits) | k for k in sub)
    summary_keys: list[int] = []
    if v.summary is not None:
        if v.summary.bits != v.bits - lo_bits:
            report.add(f"{where}: summary has the wrong universe")
        else:
            summary_keys = _validate_node(v.summary, report, f"{where}.summary")
    if summary_keys != live:
        report.add(f"{where}: summary {summary_keys} does not match non-empty clusters {live}")
    if v.min is None:
        if below:
            report.add(f"{where}: empty node has keys below it")
        return []
    if below and below[0] <= v.min:
        report.add(f"{where}: min {v.min} is not below every cluster key (first {below[0]})")
    if v.min in below:
        report.add(f"{where}: min {v.min} is duplicated inside a cluster")
    expect_max = below[-1] if below else v.min
    if v.max != expect_max:
        report.add(f"{where}: max {v.max} but largest key is {expect_max}")
    return [v.min] + below
