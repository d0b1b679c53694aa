from .csvio import HEADER, emit_csv
from .registry import STRUCTURES, StructureEntry
from .runner import MODES, BenchmarkError, Measurement, mean_throughput, run_benchmark
from .workload import MIXES, WorkloadSpec, gen_initial_keys, gen_workload

__all__ = [
    "HEADER",
    "MIXES",
    "MODES",
    "STRUCTURES",
    "BenchmarkError",
    "Measurement",
    "StructureEntry",
    "WorkloadSpec",
    "emit_csv",
    "gen_initial_keys",
    "gen_workload",
    "mean_throughput",
    "run_benchmark",
]
