"""Reified operation descriptors passed through batches.

Map-like structures (the balanced trees and the B-tree) take ``Insert`` /
``Search``; set-like structures (tries, skip list) take ``Insert`` / ``Mem`` /
``Predecessor`` / ``Successor``; the counter takes ``Incr`` / ``Get``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any


@dataclass(frozen=True, slots=True)
class Insert:
    key: Any
    value: Any = None


@dataclass(frozen=True, slots=True)
class Search:
    key: Any


@dataclass(frozen=True, slots=True)
class Delete:
    key: Any


@dataclass(frozen=True, slots=True)
class Mem:
    key: Any


@dataclass(frozen=True, slots=True)
class Predecessor:
    key: Any


@dataclass(frozen=True, slots=True)
class Successor:
    key: Any


@dataclass(frozen=True, slots=True)
class Incr:
    pass


@dataclass(frozen=True, slots=True)
class Get:
    pass


QUERY_OPS = (Search, Mem, Predecessor, Successor)


def apply_to_map(structure: Any, op: Any) -> Any:
    """Run one descriptor against a sequential map (search/insert/delete)."""
    kind = type(op)
    if kind is Search:
        return structure.search(op.key)
    if kind is Insert:
        structure.insert(op.key, op.value)
        return None
    if kind is Delete:
        structure.delete(op.key)
        return None
    raise TypeError(f"map structures do not support {op!r}")


def apply_to_set(structure: Any, op: Any) -> Any:
    """Run one descriptor against a sequential integer set."""
    kind = type(op)
    if kind is Mem:
        return structure.mem(op.key)
    if kind is Insert:
        structure.insert(op.key)
        return None
    if kind is Predecessor:
        return structure.predecessor(op.key)
    if kind is Successor:
        return structure.successor(op.key)
    if kind is Delete:
        structure.delete(op.key)
        return None
    raise TypeError(f"set structures do not support {op!r}")
