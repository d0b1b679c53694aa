"""Implicit batching for batch-parallel data structures.

Write a structure that processes whole batches of operations, wrap it, and
use it from many concurrent tasks as if it were an ordinary thread-safe
structure.
"""

from .core import BatchedOp, BatchedStructure, LaunchConfig, RequestContainer, wrap
from .errors import BatchFailed, ContractViolation, KeyOutOfRange, PoolClosed, UnsupportedOperation
from .exposerepair import ExposeRepair
from .ops import Delete, Get, Incr, Insert, Mem, Predecessor, Search, Successor
from .splitjoin import ExecutorConfig, SplitJoin, join_multiple, split_multiple
from .substrate import (
    DeferredCell,
    Pool,
    Range,
    new_deferred,
    par_do,
    parallel_sort,
    partition_by_pivots,
    run_parallel_for,
)
from .validation import Validation

__all__ = [
    "BatchFailed",
    "BatchedOp",
    "BatchedStructure",
    "ContractViolation",
    "DeferredCell",
    "Delete",
    "ExecutorConfig",
    "ExposeRepair",
    "Get",
    "Incr",
    "Insert",
    "KeyOutOfRange",
    "LaunchConfig",
    "Mem",
    "Pool",
    "PoolClosed",
    "Predecessor",
    "Range",
    "RequestContainer",
    "Search",
    "SplitJoin",
    "Successor",
    "UnsupportedOperation",
    "Validation",
    "join_multiple",
    "new_deferred",
    "par_do",
    "parallel_sort",
    "partition_by_pivots",
    "run_parallel_for",
    "split_multiple",
    "wrap",
]
