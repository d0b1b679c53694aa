from ._base import JoinTree
from .avl import AVLTree
from .rbtree import RBTree
from .treap import Treap

__all__ = ["AVLTree", "JoinTree", "RBTree", "Treap"]
