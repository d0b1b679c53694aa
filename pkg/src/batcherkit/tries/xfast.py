"""X-fast trie with dense per-level arrays.

``levels[d]`` has ``2**d`` slots indexed by the top ``d`` bits of a key; the
last level holds the leaves, which form a doubly linked sorted list.  An
internal node missing one child keeps a descendant pointer: to the smallest
leaf of its right subtree when the left child is missing, to the largest
leaf of its left subtree when the right child is missing.  Nodes with two
children keep ``desc = None``.

Memory is ``O(u)`` slots.  That is the price of using arrays for the level
tables instead of hash maps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

from ..errors import KeyOutOfRange
from ..ops import apply_to_set
from ..substrate import Range
from ..validation import Validation

__all__ = ["XFastTrie"]


class _Leaf:
    __slots__ = ("key", "prev", "next")

    def __init__(self, key: int) -> None:
        self.key = key
        self.prev: _Leaf | None = None
        self.next: _Leaf | None = None

    def __repr__(self) -> str:
        return f"<leaf {self.key}>"


class _Inner:
    __slots__ = ("desc",)

    def __init__(self, desc: _Leaf | None) -> None:
        self.desc = desc


@dataclass(slots=True)
class _Exposure:
    layer: int
    pivots: list[int]


class XFastTrie:
    """Integer set over ``[0, universe)``; ``universe`` must be a power of two >= 2."""

    __slots__ = ("universe", "bits", "levels")

    def __init__(self, universe: int) -> None:
        if universe < 2 or universe & (universe - 1):
            raise ValueError(f"universe must be a power of two >= 2, got {universe}")
        self.universe = universe
        self.bits = universe.bit_length() - 1
        self.levels: list[list[Any]] = [[None] * (1 << d) for d in range(self.bits + 1)]

    def _check(self, key: int) -> None:
        if not 0 <= key < self.universe:
            raise KeyOutOfRange(f"key {key} outside universe [0, {self.universe})")

    # -- lookups -------------------------------------------------------------

    def _deepest(self, key: int, top: int = 0) -> int:
        """Deepest level in ``[top, bits]`` holding a prefix of ``key`` (``top - 1`` if none)."""
        b, levels = self.bits, self.levels
        if levels[top][key >> (b - top)] is None:
            return top - 1
        lo, hi = top, b
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if levels[mid][key >> (b - mid)] is not None:
                lo = mid
            else:
                hi = mid - 1
        return lo

    def _neighbours(self, key: int, top: int = 0) -> tuple[_Leaf | None, _Leaf | None]:
        """Leaves holding the largest key < ``key`` and the smallest key > ``key``.

        Only the part of the trie at or below level ``top`` is consulted.
        """
        b = self.bits
        d = self._deepest(key, top)
        if d < top:
            return None, None
        if d == b:
            leaf = self.levels[b][key]
            return leaf.prev, leaf.next
        node = self.levels[d][key >> (b - d)]
        if (key >> (b - d - 1)) & 1:
            pred = node.desc
            return pred, pred.next
        succ = node.desc
        return succ.prev, succ

    def mem(self, key: int) -> bool:
        self._check(key)
        return self.levels[self.bits][key] is not None

    __contains__ = mem

    def successor(self, key: int) -> int | None:
        self._check(key)
        succ = self._neighbours(key)[1]
        return None if succ is None else succ.key

    def predecessor(self, key: int) -> int | None:
        self._check(key)
        pred = self._neighbours(key)[0]
        return None if pred is None else pred.key

    def floor(self, key: int) -> int | None:
        """Largest stored key <= ``key``."""
        return key if self.mem(key) else self.predecessor(key)

    def min(self) -> int | None:
        return self.successor(0) if self.levels[self.bits][0] is None else 0

    def max(self) -> int | None:
        top = self.universe - 1
        return top if self.levels[self.bits][top] is not None else self.predecessor(top)

    # -- updates -------------------------------------------------------------

    def _insert(self, key: int, top: int = 0) -> None:
        """Insert using (and touching) only levels ``top`` and below."""
        b, levels = self.bits, self.levels
        if levels[b][key] is not None:
            return
        pred, succ = self._neighbours(key, top)
        leaf = _Leaf(key)
        leaf.prev, leaf.next = pred, succ
        if pred is not None:
            pred.next = leaf
        if succ is not None:
            succ.prev = leaf
        levels[b][key] = leaf
        for d in range(b - 1, top - 1, -1):
            p = key >> (b - d)
            node = levels[d][p]
            if node is None:
                levels[d][p] = _Inner(leaf)
                continue
            left = levels[d + 1][2 * p] is not None
            right = levels[d + 1][2 * p + 1] is not None
            if left and right:
                node.desc = None
            elif left:
                if node.desc.key < key:
                    node.desc = leaf
            elif key < node.desc.key:
                node.desc = leaf

    def insert(self, key: int) -> None:
        self._check(key)
        self._insert(key)

    def delete(self, key: int) -> None:
        self._check(key)
        b, levels = self.bits, self.levels
        leaf = levels[b][key]
        if leaf is None:
            return
        pred, succ = leaf.prev, leaf.next
        if pred is not None:
            pred.next = succ
        if succ is not None:
            succ.prev = pred
        levels[b][key] = None
        for d in range(b - 1, -1, -1):
            p = key >> (b - d)
            node = levels[d][p]
            left = levels[d + 1][2 * p] is not None
            right = levels[d + 1][2 * p + 1] is not None
            if not left and not right:
                levels[d][p] = None
            elif left and right:
                node.desc = None
            elif node.desc is None or node.desc is leaf:
                node.desc = pred if left else succ

    def apply_op(self, op: Any) -> Any:
        return apply_to_set(self, op)

    def keys(self) -> list[int]:
        out = []
        leaf = self._min_leaf(0, 0)
        while leaf is not None:
            out.append(leaf.key)
            leaf = leaf.next
        return out

    def __len__(self) -> int:
        return len(self.keys())

    def _min_leaf(self, d: int, p: int) -> _Leaf | None:
        b, levels = self.bits, self.levels
        if levels[d][p] is None:
            return None
        while d < b:
            if levels[d + 1][2 * p] is None:
                return levels[d][p].desc
            d, p = d + 1, 2 * p
        return levels[b][p]

    def _max_leaf(self, d: int, p: int) -> _Leaf | None:
        b, levels = self.bits, self.levels
        if levels[d][p] is None:
            return None
        while d < b:
            if levels[d + 1][2 * p + 1] is None:
                return levels[d][p].desc
            d, p = d + 1, 2 * p + 1
        return levels[b][p]

    # -- expose / repair ---------------------------------------------------

    def expose(self, seeds: Sequence[int]) -> tuple[list[int], _Exposure]:
        """Cut the trie into the ``2**L`` subtrees rooted at level ``L``.

        ``L`` grows with the number of seeds.  Leaf links between subtrees
        are severed so that each subtree can be updated on its own, and the
        nodes above level ``L`` on the seeds' paths are created up front.
        """
        b, levels = self.bits, self.levels
        layer = min(b, max(1, len(seeds).bit_length()))
        shift = b - layer
        for p in range(1 << layer):
            lo = self._min_leaf(layer, p)
            if lo is not None:
                lo.prev = None
                self._max_leaf(layer, p).next = None
        for s in seeds:
            for d in range(layer):
                p = s >> (b - d)
                if levels[d][p] is None:
                    levels[d][p] = _Inner(None)
        pivots = [p << shift for p in range(1, 1 << layer)]
        return pivots, _Exposure(layer, pivots)

    def insert_range(self, keys: Sequence[int], aux: _Exposure, rng: Range) -> None:
        layer = aux.layer
        for i in range(rng.start, rng.end):
            self._insert(keys[i], layer)

    def repair(self, aux: _Exposure) -> None:
        """Restitch the leaf list and rebuild everything above level ``L``."""
        layer = aux.layer
        levels = self.levels
        lows: list[_Leaf | None] = []
        highs: list[_Leaf | None] = []
        prev: _Leaf | None = None
        for p in range(1 << layer):
            lo = self._min_leaf(layer, p)
            hi = self._max_leaf(layer, p) if lo is not None else None
            lows.append(lo)
            highs.append(hi)
            if lo is None:
                continue
            lo.prev = prev
            if prev is not None:
                prev.next = lo
            prev = hi
        if prev is not None:
            prev.next = None
        for d in range(layer - 1, -1, -1):
            row, below = levels[d], levels[d + 1]
            nlows: list[_Leaf | None] = []
            nhighs: list[_Leaf | None] = []
            for p in range(1 << d):
                left, right = below[2 * p] is not None, below[2 * p + 1] is not None
                lo = lows[2 * p] if left else lows[2 * p + 1]
                hi = highs[2 * p + 1] if right else highs[2 * p]
                nlows.append(lo)
                nhighs.append(hi)
                if not left and not right:
                    row[p] = None
                    continue
                desc = None if left and right else (highs[2 * p] if left else lows[2 * p + 1])
                if row[p] is None:
                    row[p] = _Inner(desc)
                else:
                    row[p].desc = desc
            lows, highs = nlows, nhighs

    # -- validation ----------------------------------------------------------

    def validate(self) -> Validation:
        report = Validation()
        b, levels = self.bits, self.levels
        leaves = {k: leaf for k, leaf in enumerate(levels[b]) if leaf is not None}
        for k, leaf in leaves.items():
            if not isinstance(leaf, _Leaf) or leaf.key != k:
                report.add(f"leaf slot {k} holds {leaf!r}")
                return report
        ordered = sorted(leaves)
        for i, k in enumerate(ordered):
            leaf = leaves[k]
            want_prev = leaves[ordered[i - 1]] if i > 0 else None
            want_next = leaves[ordered[i + 1]] if i + 1 < len(ordered) else None
            if leaf.prev is not want_prev:
                report.add(f"leaf {k}: prev is {leaf.prev!r}, expected {want_prev!r}")
            if leaf.next is not want_next:
                report.add(f"leaf {k}: next is {leaf.next!r}, expected {want_next!r}")
            if leaf.next is not None and leaf.next.prev is not leaf:
                report.add(f"leaf {k}: next.prev does not point back")
        for d in range(b - 1, -1, -1):
            shift = b - d
            lo: dict[int, int] = {}
            hi: dict[int, int] = {}
            for k in ordered:
                p = k >> shift
                lo.setdefault(p, k)
                hi[p] = k
            for p, node in enumerate(levels[d]):
                if (node is not None) != (p in lo):
                    report.add(f"level {d} slot {p}: presence {node is not None}, "
                               f"subtree {'non-empty' if p in lo else 'empty'}")
                    continue
                if node is None:
                    continue
                left = levels[d + 1][2 * p] is not None
                right = levels[d + 1][2 * p + 1] is not None
                if left and right:
                    if node.desc is not None:
                        report.add(f"level {d} slot {p}: two children but a descendant pointer")
                    continue
                want = hi[p] if left else lo[p]
                if node.desc is None or node.desc is not leaves.get(want):
                    got = None if node.desc is None else node.desc.key
                    report.add(f"level {d} slot {p}: descendant pointer {got}, expected {want}")
        return report
