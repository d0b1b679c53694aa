"""AVL tree with a height-driven join."""

from __future__ import annotations

from typing import Any

from ..validation import Validation
from ._base import JoinTree


class _Node:
    __slots__ = ("key", "value", "height", "left", "right")

    def __init__(self, key: Any, value: Any) -> None:
        self.key = key
        self.value = value
        self.height = 1
        self.left: _Node | None = None
        self.right: _Node | None = None


def _h(n: _Node | None) -> int:
    return 0 if n is None else n.height


def _fix(n: _Node) -> None:
    n.height = 1 + max(_h(n.left), _h(n.right))


def _link(left: _Node | None, n: _Node, right: _Node | None) -> _Node:
    n.left, n.right = left, right
    _fix(n)
    return n


def _rotate_left(x: _Node) -> _Node:
    y = x.right
    x.right = y.left
    _fix(x)
    y.left = x
    _fix(y)
    return y


def _rotate_right(x: _Node) -> _Node:
    y = x.left
    x.left = y.right
    _fix(x)
    y.right = x
    _fix(y)
    return y


def _rebalance(n: _Node) -> _Node:
    _fix(n)
    bal = _h(n.left) - _h(n.right)
    if bal > 1:
        if _h(n.left.left) < _h(n.left.right):
            n.left = _rotate_left(n.left)
        return _rotate_right(n)
    if bal < -1:
        if _h(n.right.right) < _h(n.right.left):
            n.right = _rotate_right(n.right)
        return _rotate_left(n)
    return n


def _join_right(tl: _Node, mid: _Node, tr: _Node | None) -> _Node:
    l, c = tl.left, tl.right
    if _h(c) <= _h(tr) + 1:
        t = _link(c, mid, tr)
        if _h(t) <= _h(l) + 1:
            return _link(l, tl, t)
        tl.right = _rotate_right(t)
        _fix(tl)
        return _rotate_left(tl)
    t = _join_right(c, mid, tr)
    _link(l, tl, t)
    if _h(t) <= _h(l) + 1:
        return tl
    return _rotate_left(tl)


def _join_left(tl: _Node | None, mid: _Node, tr: _Node) -> _Node:
    c, r = tr.left, tr.right
    if _h(c) <= _h(tl) + 1:
        t = _link(tl, mid, c)
        if _h(t) <= _h(r) + 1:
            return _link(t, tr, r)
        tr.left = _rotate_left(t)
        _fix(tr)
        return _rotate_right(tr)
    t = _join_left(tl, mid, c)
    _link(t, tr, r)
    if _h(t) <= _h(r) + 1:
        return tr
    return _rotate_right(tr)


class AVLTree(JoinTree):
    """AVL tree map; ``size_factor`` is the stored root height."""

    __slots__ = ()

    def _new_node(self, key: Any, value: Any) -> _Node:
        return _Node(key, value)

    def _join(self, tl: _Node | None, mid: _Node, tr: _Node | None) -> _Node:
        hl, hr = _h(tl), _h(tr)
        if hl > hr + 1:
            return _join_right(tl, mid, tr)
        if hr > hl + 1:
            return _join_left(tl, mid, tr)
        return _link(tl, mid, tr)

    def _insert_node(self, node: _Node | None, key: Any, value: Any) -> tuple[_Node, bool]:
        added = [False]

        def ins(n: _Node | None) -> _Node:
            if n is None:
                added[0] = True
                return _Node(key, value)
            if key < n.key:
                n.left = ins(n.left)
            elif n.key < key:
                n.right = ins(n.right)
            else:
                n.value = value
                return n
            return _rebalance(n)

        return ins(node), added[0]

    def size_factor(self) -> int:
        return _h(self.root)

    def validate(self) -> Validation:
        report = Validation()
        self._check_order(report)

        def walk(n: _Node | None) -> int:
            if n is None:
                return 0
            lh, rh = walk(n.left), walk(n.right)
            if abs(lh - rh) > 1:
                report.add(f"AVL balance broken at {n.key!r}: heights {lh} and {rh}")
            h = 1 + max(lh, rh)
            if n.height != h:
                report.add(f"stored height {n.height} at {n.key!r}, recomputed {h}")
            return h

        walk(self.root)
        return report
