"""Exception types shared across the package."""

from __future__ import annotations


class ContractViolation(AssertionError):
    """A documented precondition or single-use invariant was broken by the caller.

    Raised unconditionally (not only under ``-O``-less runs), because silently
    ignoring a second resolution or an unsorted pivot array corrupts state.
    """


class UnsupportedOperation(Exception):
    """The batch executor received an operation kind it does not implement."""


class KeyOutOfRange(ValueError):
    """Integer key outside the ``[0, universe)`` range of a trie structure."""


class BatchFailed(RuntimeError):
    """Delivered to every pending client of a batch whose executor raised."""


class PoolClosed(RuntimeError):
    """Raised when submitting to a pool that has been shut down."""
