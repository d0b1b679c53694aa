from .btree import BatchedBTree, BTree, btree_capacity
from .coarse import CoarseWrapper, coarse_wrap
from .counter import BatchedCounter, Counter
from .skiplist import BatchedSkipList, SkipList

__all__ = [
    "BTree",
    "BatchedBTree",
    "BatchedCounter",
    "BatchedSkipList",
    "CoarseWrapper",
    "Counter",
    "SkipList",
    "btree_capacity",
    "coarse_wrap",
]
