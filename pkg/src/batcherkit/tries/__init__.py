from .veb import VEBTree
from .xfast import XFastTrie
from .yfast import YFastTrie

__all__ = ["VEBTree", "XFastTrie", "YFastTrie"]
