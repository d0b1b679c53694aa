"""Shared machinery for join-based balanced binary search trees.

Every balancing scheme (red-black, AVL, treap) only has to provide
``_join(left, mid, right)``, which links two trees through a middle node
whose key sits strictly between them and rebalances.  Split, delete and the
two-tree join are derived from it, following the join-based formulation of
Blelloch, Ferizovic and Sun.  All operations reuse node objects and mutate
in place; callers must hold exclusive access.
"""

from __future__ import annotations

from typing import Any, Iterator, TypeVar

from ..errors import ContractViolation
from ..ops import apply_to_map
from ..validation import Validation

T = TypeVar("T", bound="JoinTree")


def default_compare(a: Any, b: Any) -> int:
    return (a > b) - (a < b)


class JoinTree:
    """Map from ordered keys to values, stored as a binary search tree."""

    __slots__ = ("root",)

    compare = staticmethod(default_compare)

    def __init__(self) -> None:
        self.root: Any = None

    # -- hooks -------------------------------------------------------------

    def _new_node(self, key: Any, value: Any) -> Any:
        raise NotImplementedError

    def _join(self, left: Any, mid: Any, right: Any) -> Any:
        raise NotImplementedError

    def _insert_node(self, node: Any, key: Any, value: Any) -> tuple[Any, bool]:
        raise NotImplementedError

    def _fresh(self: T) -> T:
        return type(self)()

    def size_factor(self) -> int:
        raise NotImplementedError

    def validate(self) -> Validation:
        raise NotImplementedError

    # -- sequential map interface -------------------------------------------

    def search(self, key: Any) -> Any:
        n = self.root
        while n is not None:
            k = n.key
            if key < k:
                n = n.left
            elif k < key:
                n = n.right
            else:
                return n.value
        return None

    def __contains__(self, key: Any) -> bool:
        n = self.root
        while n is not None:
            k = n.key
            if key < k:
                n = n.left
            elif k < key:
                n = n.right
            else:
                return True
        return False

    def insert(self, key: Any, value: Any = None) -> bool:
        """Insert or overwrite; returns True when the key was new."""
        self.root, added = self._insert_node(self.root, key, value)
        return added

    def delete(self, key: Any) -> bool:
        left, mid, right = self._split3(self.root, key)
        self.root = self._join2(left, right)
        return mid is not None

    def apply_op(self, op: Any) -> Any:
        return apply_to_map(self, op)

    # -- split / join --------------------------------------------------------

    def _split3(self, n: Any, key: Any) -> tuple[Any, Any, Any]:
        if n is None:
            return None, None, None
        if key < n.key:
            left, mid, right = self._split3(n.left, key)
            return left, mid, self._join(right, n, n.right)
        if n.key < key:
            left, mid, right = self._split3(n.right, key)
            return self._join(n.left, n, left), mid, right
        return n.left, n, n.right

    def _split_last(self, n: Any) -> tuple[Any, Any]:
        if n.right is None:
            return n.left, n
        rest, last = self._split_last(n.right)
        return self._join(n.left, n, rest), last

    def _join2(self, left: Any, right: Any) -> Any:
        if left is None:
            return right
        if right is None:
            return left
        rest, last = self._split_last(left)
        return self._join(rest, last, right)

    def split(self: T, key: Any) -> tuple[T, T]:
        """Cut into (keys < key, keys >= key).  ``self`` is left empty."""
        left, mid, right = self._split3(self.root, key)
        if mid is not None:
            right = self._join(None, mid, right)
        self.root = None
        a, b = self._fresh(), self._fresh()
        a.root, b.root = left, right
        return a, b

    @classmethod
    def join(cls: type[T], a: T, b: T) -> T:
        """Concatenate two trees whose key ranges do not overlap (a before b)."""
        if a.root is not None and b.root is not None and not a.max_key() < b.min_key():
            raise ContractViolation(
                f"join needs max(a) < min(b), got {a.max_key()!r} >= {b.min_key()!r}")
        out = a._fresh()
        out.root = a._join2(a.root, b.root)
        a.root = None
        b.root = None
        return out

    def set_root(self, other: JoinTree) -> None:
        self.root = other.root

    # -- inspection ----------------------------------------------------------

    def min_key(self) -> Any:
        n = self.root
        if n is None:
            raise ValueError("empty tree")
        while n.left is not None:
            n = n.left
        return n.key

    def max_key(self) -> Any:
        n = self.root
        if n is None:
            raise ValueError("empty tree")
        while n.right is not None:
            n = n.right
        return n.key

    def successor(self, key: Any) -> Any:
        """Smallest stored key strictly greater than ``key``, or None."""
        n, best = self.root, None
        while n is not None:
            if key < n.key:
                best = n.key
                n = n.left
            else:
                n = n.right
        return best

    def predecessor(self, key: Any) -> Any:
        """Largest stored key strictly less than ``key``, or None."""
        n, best = self.root, None
        while n is not None:
            if n.key < key:
                best = n.key
                n = n.right
            else:
                n = n.left
        return best

    def items(self) -> Iterator[tuple[Any, Any]]:
        stack: list[Any] = []
        n = self.root
        while stack or n is not None:
            while n is not None:
                stack.append(n)
                n = n.left
            n = stack.pop()
            yield n.key, n.value
            n = n.right

    def keys(self) -> list[Any]:
        return [k for k, _ in self.items()]

    def __len__(self) -> int:
        return sum(1 for _ in self.items())

    def __bool__(self) -> bool:
        return self.root is not None

    def height(self) -> int:
        def h(n: Any) -> int:
            return 0 if n is None else 1 + max(h(n.left), h(n.right))
        return h(self.root)

    def _check_order(self, report: Validation) -> None:
        prev = None
        first = True
        for k, _ in self.items():
            if not first and not prev < k:
                report.add(f"BST order broken: {prev!r} before {k!r}")
                return
            prev, first = k, False
