"""Split-join batch executor for ordered maps.

Searches of a batch run in parallel against the tree as it was before the
batch.  Inserts are then applied by cutting the tree at a few pivots drawn
from the batch, inserting each sorted slice into its own subtree in
parallel, and joining the pieces back together.

Insert requests are acknowledged as soon as they are classified, before the
tree is actually modified.  That is fine for linearisability (the whole batch
is one window) but means nobody may peek at the tree behind the executor's
back.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from operator import itemgetter
from typing import Any, Callable, Sequence

from .core import BatchedOp
from .errors import ContractViolation, UnsupportedOperation
from .ops import Insert, Search
from .substrate import Pool, Range, parallel_sort, partition_by_pivots, run_parallel_for
from .trees._base import JoinTree

__all__ = [
    "ExecutorConfig",
    "SplitJoin",
    "choose_seeds",
    "join_multiple",
    "split_multiple",
]

_first = itemgetter(0)


@dataclass(frozen=True, slots=True)
class ExecutorConfig:
    """Thresholds below which a batch is inserted sequentially.

    ``seq_threshold`` also sets the target slice size: a batch of ``n``
    inserts is cut into about ``n // seq_threshold + 1`` pieces.
    """

    seq_threshold: int = 64
    size_factor_threshold: int = 4

    def __post_init__(self) -> None:
        if self.seq_threshold < 1:
            raise ValueError("seq_threshold must be >= 1")
        if self.size_factor_threshold < 0:
            raise ValueError("size_factor_threshold must be >= 0")


def choose_seeds(keys: Sequence[Any], n: int) -> list[Any]:
    """Pick ``n`` pivot candidates from ``keys``, assumed to arrive in random order.

    The first ``n`` keys are used.  If they already look sorted the input is
    probably not random, so ``n`` pseudo-random positions are sampled instead.
    """
    n = min(n, len(keys))
    head = list(keys[:n])
    if n > 2 and all(not (b < a) for a, b in zip(head, head[1:])):
        picks = random.Random(len(keys)).sample(range(len(keys)), n)
        return [keys[i] for i in picks]
    return head


def split_multiple(tree: JoinTree, pivots: Sequence[Any]) -> list[JoinTree]:
    """Cut ``tree`` into ``len(pivots) + 1`` trees; ``tree`` is left empty.

    Part ``i`` holds the keys ``k`` with ``pivots[i-1] <= k < pivots[i]``.
    """
    for a, b in zip(pivots, pivots[1:]):
        if not a < b:
            raise ContractViolation(f"pivots must be strictly increasing, got {a!r} then {b!r}")
    parts: list[JoinTree] = []
    rest = tree
    for p in pivots:
        left, rest = rest.split(p)
        parts.append(left)
    if rest is tree:
        rest = tree._fresh()
        rest.root, tree.root = tree.root, None
    parts.append(rest)
    return parts


def join_multiple(parts: Sequence[JoinTree]) -> JoinTree:
    """Left fold of ``join`` over key-ordered, non-overlapping trees."""
    if not parts:
        raise ValueError("join_multiple needs at least one tree")
    acc = parts[0]
    for part in parts[1:]:
        acc = type(acc).join(acc, part)
    return acc


class SplitJoin:
    """Explicitly batched map over any :class:`JoinTree` kind.

    ``make_tree`` builds the empty structure (``RBTree``, ``AVLTree``,
    ``lambda: Treap(seed)`` ...).  Supported operations are ``Search`` and
    ``Insert``; anything else fails with :class:`UnsupportedOperation`.
    """

    def __init__(self, make_tree: Callable[[], JoinTree], config: ExecutorConfig | None = None) -> None:
        self.make_tree = make_tree
        self.config = config or ExecutorConfig()
        self.parallel_rounds = 0

    def init(self) -> JoinTree:
        return self.make_tree()

    def run_batch(self, tree: JoinTree, pool: Pool, ops: list[BatchedOp]) -> None:
        searches: list[BatchedOp] = []
        inserts: list[tuple[Any, Any]] = []
        for bop in ops:
            kind = type(bop.op)
            if kind is Search:
                searches.append(bop)
            elif kind is Insert:
                inserts.append((bop.op.key, bop.op.value))
                bop.complete(None)
            else:
                bop.fail(UnsupportedOperation(f"split-join maps do not support {bop.op!r}"))

        if searches:
            def search(i: int) -> None:
                bop = searches[i]
                bop.complete(tree.search(bop.op.key))

            run_parallel_for(pool, Range(0, len(searches)), search)
        if inserts:
            self.par_insert(pool, tree, inserts)

    def par_insert(self, pool: Pool, tree: JoinTree, inserts: list[tuple[Any, Any]]) -> None:
        cfg = self.config
        n = len(inserts)
        if n < cfg.seq_threshold or tree.size_factor() < cfg.size_factor_threshold:
            for k, v in inserts:
                tree.insert(k, v)
            return

        seeds = choose_seeds([k for k, _ in inserts], n // cfg.seq_threshold + 1)
        pivots = sorted(set(seeds))
        if len(pivots) < 2:
            for k, v in inserts:
                tree.insert(k, v)
            return

        self.parallel_rounds += 1
        parts = split_multiple(tree, pivots)
        batch = list(inserts)
        # stable, so the later of two equal keys still wins
        parallel_sort(pool, batch, key=_first)
        ranges = partition_by_pivots(pivots, batch, key_of=_first, check=False)

        def fill(i: int) -> None:
            part = parts[i]
            r = ranges[i]
            for j in range(r.start, r.end):
                k, v = batch[j]
                part.insert(k, v)

        run_parallel_for(pool, Range(0, len(parts)), fill, chunk_hint=1)
        tree.set_root(join_multiple(parts))
