"""Partitioned, dependency-ordered execution of the fixed-point solver."""
from ..reduction import deterministic_reduce
from .driver import KERNELS, ConvergenceHistory, PhasePlan, run_fixed_point
from .partition import Partitioning, exchange_ghosts, make_partitioning, partition_cloud
from .scheduler import Phase, PhaseScheduler

__all__ = [
    "KERNELS", "ConvergenceHistory", "PhasePlan", "run_fixed_point", "Partitioning",
    "exchange_ghosts", "make_partitioning", "partition_cloud", "Phase", "PhaseScheduler",
    "deterministic_reduce",
]
