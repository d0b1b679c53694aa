"""Red-black tree with stored black heights.

A red root is legal here: split and join routinely produce one.  Black
height counts black nodes from a node down to its leaves, the node itself
included; the empty tree (and a lone red node) has black height 0.
"""

from __future__ import annotations

from typing import Any

from ..validation import Validation
from ._base import JoinTree


class _Node:
    __slots__ = ("key", "value", "red", "bh", "left", "right")

    def __init__(self, key: Any, value: Any) -> None:
        self.key = key
        self.value = value
        self.red = True
        self.bh = 0
        self.left: _Node | None = None
        self.right: _Node | None = None

    def __repr__(self) -> str:
        return f"<{'R' if self.red else 'B'} {self.key!r} bh={self.bh}>"


def _bh(n: _Node | None) -> int:
    return 0 if n is None else n.bh


def _red(n: _Node | None) -> bool:
    return n is not None and n.red


def _fix(n: _Node) -> None:
    n.bh = _bh(n.left) + (0 if n.red else 1)


def _rotate_left(x: _Node) -> _Node:
    y = x.right
    x.right = y.left
    y.left = x
    _fix(x)
    _fix(y)
    return y


def _rotate_right(x: _Node) -> _Node:
    y = x.left
    x.left = y.right
    y.right = x
    _fix(x)
    _fix(y)
    return y


def _balance(n: _Node) -> _Node:
    """Resolve a red-red pair directly below a black node (Okasaki's four cases)."""
    if n.red:
        return n
    left, right = n.left, n.right
    if left is not None and left.red:
        if _red(left.left):
            x, y, z = left.left, left, n
            z.left = y.right
            y.right = z
        elif _red(left.right):
            x, y, z = left, left.right, n
            x.right = y.left
            z.left = y.right
            y.left, y.right = x, z
        else:
            x = None
        if x is not None:
            x.red = z.red = False
            y.red = True
            _fix(x)
            _fix(z)
            _fix(y)
            return y
    if right is not None and right.red:
        if _red(right.left):
            x, y, z = n, right.left, right
            x.right = y.left
            z.left = y.right
            y.left, y.right = x, z
        elif _red(right.right):
            x, y, z = n, right, right.right
            x.right = y.left
            y.left = x
        else:
            return n
        x.red = z.red = False
        y.red = True
        _fix(x)
        _fix(z)
        _fix(y)
        return y
    return n


def _join_right(tl: _Node | None, mid: _Node, tr: _Node | None) -> _Node:
    if not _red(tl) and _bh(tl) == _bh(tr):
        mid.left, mid.right, mid.red = tl, tr, True
        _fix(mid)
        return mid
    assert tl is not None
    tl.right = _join_right(tl.right, mid, tr)
    if not tl.red and _red(tl.right) and _red(tl.right.right):
        rr = tl.right.right
        rr.red = False
        _fix(rr)
        return _rotate_left(tl)
    return tl


def _join_left(tl: _Node | None, mid: _Node, tr: _Node | None) -> _Node:
    if not _red(tr) and _bh(tr) == _bh(tl):
        mid.left, mid.right, mid.red = tl, tr, True
        _fix(mid)
        return mid
    assert tr is not None
    tr.left = _join_left(tl, mid, tr.left)
    if not tr.red and _red(tr.left) and _red(tr.left.left):
        ll = tr.left.left
        ll.red = False
        _fix(ll)
        return _rotate_right(tr)
    return tr


class RBTree(JoinTree):
    """Red-black tree map; ``size_factor`` is the root's black height."""

    __slots__ = ()

    def _new_node(self, key: Any, value: Any) -> _Node:
        return _Node(key, value)

    def _join(self, tl: _Node | None, mid: _Node, tr: _Node | None) -> _Node:
        hl, hr = _bh(tl), _bh(tr)
        if hl > hr:
            t = _join_right(tl, mid, tr)
            if t.red and _red(t.right):
                t.red = False
                _fix(t)
            return t
        if hr > hl:
            t = _join_left(tl, mid, tr)
            if t.red and _red(t.left):
                t.red = False
                _fix(t)
            return t
        mid.left, mid.right = tl, tr
        mid.red = not _red(tl) and not _red(tr)
        _fix(mid)
        return mid

    def _insert_node(self, node: _Node | None, key: Any, value: Any) -> tuple[_Node, bool]:
        added = [False]

        def ins(n: _Node | None) -> _Node:
            if n is None:
                added[0] = True
                return _Node(key, value)
            k = n.key
            if key < k:
                n.left = ins(n.left)
            elif k < key:
                n.right = ins(n.right)
            else:
                n.value = value
                return n
            return _balance(n)

        root = ins(node)
        if root.red and (_red(root.left) or _red(root.right)):
            root.red = False
            _fix(root)
        return root, added[0]

    def size_factor(self) -> int:
        return _bh(self.root)

    def validate(self) -> Validation:
        report = Validation()
        self._check_order(report)

        def walk(n: _Node | None) -> int:
            if n is None:
                return 0
            if n.red and (_red(n.left) or _red(n.right)):
                report.add(f"red-red violation: red node {n.key!r} has a red child")
            lh, rh = walk(n.left), walk(n.right)
            if lh != rh:
                report.add(f"black-height mismatch at {n.key!r}: left {lh} vs right {rh}")
            h = lh + (0 if n.red else 1)
            if n.bh != h:
                report.add(f"stored black height {n.bh} at {n.key!r}, recomputed {h}")
            return h

        walk(self.root)
        return report
