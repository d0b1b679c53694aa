from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable

from .runner import BenchmarkError, Measurement

HEADER = ["structure", "mode", "workers", "mix", "initial_size", "op_count", "run", "throughput_ops_per_sec"]


def emit_csv(measurements: Iterable[Measurement], path: str | Path) -> None:
    """Write one row per timed run, in a fixed order.  Warm-up runs are skipped."""
    rows = sorted(
        (m for m in measurements if not m.warmup),
        key=lambda m: (m.structure, m.mode, m.workers, m.mix, m.initial_size, m.op_count, m.run),
    )
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(HEADER)
            for m in rows:
                w.writerow([m.structure, m.mode, m.workers, m.mix, m.initial_size, m.op_count,
                            m.run, f"{m.throughput:.3f}"])
    except OSError as exc:
        raise BenchmarkError(f"cannot write CSV to {path}: {exc.strerror or exc}") from exc
