"""Benchmarkable structures: a sequential factory and a batched implementation each."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

from ..adhoc.btree import BatchedBTree, BTree
from ..adhoc.counter import BatchedCounter, Counter
from ..adhoc.skiplist import BatchedSkipList, SkipList
from ..exposerepair import ExposeRepair
from ..splitjoin import SplitJoin
from ..trees import AVLTree, RBTree, Treap
from ..tries import VEBTree, XFastTrie, YFastTrie

__all__ = ["STRUCTURES", "StructureEntry", "universe_for"]


def universe_for(key_space: int) -> int:
    """Smallest power of two >= ``key_space`` (and >= 2)."""
    return max(2, 1 << (key_space - 1).bit_length())


@dataclass(frozen=True)
class StructureEntry:
    name: str
    kind: str  # "map", "set" or "counter"
    sequential: Callable[[int, int], Any]  # (key_space, expected_size) -> structure
    batched: Callable[[int, int], Any]  # (key_space, expected_size) -> explicitly batched impl


def _trie(cls: type) -> StructureEntry:
    name = {VEBTree: "veb", XFastTrie: "xfast", YFastTrie: "yfast"}[cls]
    return StructureEntry(
        name, "set",
        lambda ks, n: cls(universe_for(ks)),
        lambda ks, n: ExposeRepair(lambda: cls(universe_for(ks))),
    )


STRUCTURES: dict[str, StructureEntry] = {
    e.name: e
    for e in [
        StructureEntry("rbtree", "map", lambda ks, n: RBTree(), lambda ks, n: SplitJoin(RBTree)),
        StructureEntry("avl", "map", lambda ks, n: AVLTree(), lambda ks, n: SplitJoin(AVLTree)),
        StructureEntry("treap", "map", lambda ks, n: Treap(0), lambda ks, n: SplitJoin(lambda: Treap(0))),
        _trie(VEBTree),
        _trie(XFastTrie),
        _trie(YFastTrie),
        StructureEntry("btree", "map", lambda ks, n: BTree(8), lambda ks, n: BatchedBTree(8)),
        StructureEntry("skiplist", "set", lambda ks, n: SkipList(max(2, n), seed=0),
                       lambda ks, n: BatchedSkipList(max(2, n), seed=0)),
        StructureEntry("counter", "counter", lambda ks, n: Counter(), lambda ks, n: BatchedCounter()),
    ]
}
