from __future__ import annotations

import threading
from typing import Any, Callable


class CoarseWrapper:
    """Serialise every operation on a sequential structure behind one lock.

    This is the baseline the batched structures are measured against.
    ``dispatch`` maps an operation descriptor onto the inner structure; by
    default the inner object's own ``apply_op`` is used.
    """

    def __init__(self, inner: Any, dispatch: Callable[[Any, Any], Any] | None = None) -> None:
        self.inner = inner
        self.lock = threading.Lock()
        self._dispatch = dispatch or (lambda s, op: s.apply_op(op))

    def apply(self, op: Any) -> Any:
        with self.lock:
            return self._dispatch(self.inner, op)

    def with_lock(self, fn: Callable[[Any], Any]) -> Any:
        """Run an arbitrary function on the inner structure under the lock."""
        with self.lock:
            return fn(self.inner)


def coarse_wrap(inner: Any, dispatch: Callable[[Any, Any], Any] | None = None) -> CoarseWrapper:
    return CoarseWrapper(inner, dispatch)
