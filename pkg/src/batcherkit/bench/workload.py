"""Deterministic benchmark workloads."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any

from ..ops import Get, Incr, Insert, Mem, Search

__all__ = ["MIXES", "WorkloadSpec", "gen_initial_keys", "gen_workload", "op_builders"]

# mix name -> fraction of searches; the rest are inserts
MIXES: dict[str, float] = {
    "insert": 0.0,
    "search": 1.0,
    "50-50": 0.5,
    "90-10": 0.9,
}


@dataclass(frozen=True, slots=True)
class WorkloadSpec:
    structure: str
    initial_size: int = 200_000
    op_count: int = 100_000
    mix: str = "insert"
    key_space: int = 1 << 21
    seed: int = 0

    def __post_init__(self) -> None:
        if self.op_count < 1:
            raise ValueError("op_count must be >= 1")
        if self.initial_size < 0:
            raise ValueError("initial_size must be >= 0")
        if self.key_space < 1:
            raise ValueError("key_space must be >= 1")
        if self.mix not in MIXES:
            raise ValueError(f"unknown mix {self.mix!r}; pick one of {sorted(MIXES)}")


def op_builders(kind: str) -> tuple[Any, Any]:
    """(insert, search) descriptor constructors for a structure kind."""
    if kind == "map":
        return (lambda k: Insert(k, k)), Search
    if kind == "set":
        return Insert, Mem
    if kind == "counter":
        return (lambda k: Incr()), (lambda k: Get())
    raise ValueError(f"unknown structure kind {kind!r}")


def gen_initial_keys(spec: WorkloadSpec) -> list[int]:
    """``initial_size`` distinct keys drawn uniformly from ``[0, key_space)``."""
    if spec.key_space < spec.initial_size:
        raise ValueError(
            f"key_space {spec.key_space} is smaller than initial_size {spec.initial_size}")
    return random.Random(2 * spec.seed + 1).sample(range(spec.key_space), spec.initial_size)


def gen_workload(spec: WorkloadSpec, kind: str = "map") -> list[Any]:
    """Operation descriptors with exact mix counts, interleaved pseudo-randomly."""
    if spec.key_space < spec.initial_size:
        raise ValueError(
            f"key_space {spec.key_space} is smaller than initial_size {spec.initial_size}")
    make_insert, make_search = op_builders(kind)
    rng = random.Random(2 * spec.seed)
    n_search = round(spec.op_count * MIXES[spec.mix])
    is_search = [True] * n_search + [False] * (spec.op_count - n_search)
    rng.shuffle(is_search)
    space = spec.key_space
    return [make_search(rng.randrange(space)) if s else make_insert(rng.randrange(space))
            for s in is_search]
