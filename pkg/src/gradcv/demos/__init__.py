"""Executable optimization demos: registration, depth estimation, the
feature-matching attack, and the operator benchmark."""

from .config import RunConfig
from .registration import RegistrationResult, register
from .depth_estimation import DepthResult, estimate_depth
from .attack import AttackResult, attack, count_target_consistent_matches
from .bench import BenchRow, run_bench, write_bench_csv
from . import synthetic

__all__ = [
    "RunConfig",
    "register",
    "RegistrationResult",
    "estimate_depth",
    "DepthResult",
    "attack",
    "AttackResult",
    "count_target_consistent_matches",
    "run_bench",
    "write_bench_csv",
    "BenchRow",
    "synthetic",
]
