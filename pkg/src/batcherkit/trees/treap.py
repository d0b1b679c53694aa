"""Treap (randomised search tree) with stored subtree heights.

Priorities are 64-bit draws from a seedable generator.  Trees produced by
``split`` share the generator of the tree they came from.
"""

from __future__ import annotations

import random
from typing import Any

from ..validation import Validation
from ._base import JoinTree


class _Node:
    __slots__ = ("key", "value", "priority", "height", "left", "right")

    def __init__(self, key: Any, value: Any, priority: int) -> None:
        self.key = key
        self.value = value
        self.priority = priority
        self.height = 1
        self.left: _Node | None = None
        self.right: _Node | None = None


def _h(n: _Node | None) -> int:
    return 0 if n is None else n.height


def _prio(n: _Node | None) -> int:
    return -1 if n is None else n.priority


def _fix(n: _Node) -> None:
    n.height = 1 + max(_h(n.left), _h(n.right))


def _join(tl: _Node | None, mid: _Node, tr: _Node | None) -> _Node:
    if mid.priority >= _prio(tl) and mid.priority >= _prio(tr):
        mid.left, mid.right = tl, tr
        _fix(mid)
        return mid
    if _prio(tl) > _prio(tr):
        tl.right = _join(tl.right, mid, tr)
        _fix(tl)
        return tl
    tr.left = _join(tl, mid, tr.left)
    _fix(tr)
    return tr


class Treap(JoinTree):
    """Treap map; ``size_factor`` is the stored root height."""

    __slots__ = ("rng",)

    def __init__(self, seed: int | None = None, *, rng: random.Random | None = None) -> None:
        super().__init__()
        self.rng = rng if rng is not None else random.Random(seed)

    def _fresh(self) -> Treap:
        return Treap(rng=self.rng)

    def _new_node(self, key: Any, value: Any) -> _Node:
        return _Node(key, value, self.rng.getrandbits(64))

    def _join(self, tl: _Node | None, mid: _Node, tr: _Node | None) -> _Node:
        return _join(tl, mid, tr)

    def _insert_node(self, node: _Node | None, key: Any, value: Any) -> tuple[_Node, bool]:
        added = [False]

        def ins(n: _Node | None) -> _Node:
            if n is None:
                added[0] = True
                return self._new_node(key, value)
            if key < n.key:
                n.left = ins(n.left)
                if n.left.priority > n.priority:
                    c = n.left
                    n.left = c.right
                    _fix(n)
                    c.right = n
                    n = c
            elif n.key < key:
                n.right = ins(n.right)
                if n.right.priority > n.priority:
                    c = n.right
                    n.right = c.left
                    _fix(n)
                    c.left = n
                    n = c
            else:
                n.value = value
                return n
            _fix(n)
            return n

        return ins(node), added[0]

    def size_factor(self) -> int:
        return _h(self.root)

    def validate(self) -> Validation:
        report = Validation()
        self._check_order(report)

        def walk(n: _Node | None) -> int:
            if n is None:
                return 0
            for c in (n.left, n.right):
                if c is not None and c.priority > n.priority:
                    report.add(f"heap order broken: child {c.key!r} outranks parent {n.key!r}")
            h = 1 + max(walk(n.left), walk(n.right))
            if n.height != h:
                report.add(f"stored height {n.height} at {n.key!r}, recomputed {h}")
            return h

        walk(self.root)
        return report
