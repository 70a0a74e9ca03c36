"""The fixed-point iteration, executed partition by partition."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..config import freestream_state
from ..errors import PositivityError, ProtocolError
from ..kinetic import kernels as K
from ..kinetic.pointwise import residue_norm
from .scheduler import Phase, PhaseScheduler

KERNELS = ("q_variables", "q_derivatives", "flux_residual", "timestep", "state_update", "residue")


@dataclass
class ConvergenceHistory:
    n_points: int
    residue: list = field(default_factory=list)
    log10_rel: list = field(default_factory=list)
    wall_seconds: list = field(default_factory=list)
    kernel_seconds: dict = field(default_factory=dict)
    total_seconds: float = 0.0
    reference: float = 0.0   # first non-zero residue

    @property
    def iterations(self):
        return len(self.residue)

    @property
    def rdp(self):
        if not self.iterations:
            return float("nan")
        return self.total_seconds / self.iterations / self.n_points

    def record(self, res, wall):
        """Append one iteration; log10_rel is relative to the first non-zero residue
        (0 until one appears, -inf for an exact zero after it)."""
        self.residue.append(res)
        if self.reference == 0.0 and res > 0:
            self.reference = res
        if self.reference > 0:
            rel = math.log10(res / self.reference) if res > 0 else -math.inf
        else:
            rel = 0.0
        self.log10_rel.append(rel)
        self.wall_seconds.append(wall)


class PhasePlan:
    """Ordered phases of one outer iteration, bound to the partition blocks."""

    def __init__(self, cloud, partitioning, config, dU0):
        self.store = cloud.store
        self.gamma = config.gamma
        self.cfl = config.cfl
        self.order = config.order
        self.freestream = freestream_state(config.mach, config.aoa_deg, config.gamma)
        self.blocks = [K.Block.build(cloud, ids) for ids in partitioning.locals]
        self.dU0 = dU0
        n_inner = config.n_inner
        store_buf = K.StoreBuffer(self.store)
        scratch = K.ArrayBuffer(cloud.n_points)
        # Jacobi double buffer: write k of the init+sweep chain lands in the
        # store exactly when k has the parity of the last sweep.
        self.buffers = (store_buf, scratch)
        self._bufs = [store_buf if (k - n_inner) % 2 == 0 else scratch
                      for k in range(n_inner + 1)]
        phases = [Phase("q_variables", "q_variables", self._q_variables)]
        if self.order == 2:
            phases.append(Phase("q_derivatives_init", "q_derivatives", self._q_init))
            for s in range(1, n_inner + 1):
                phases.append(Phase(f"q_inner_{s}", "q_derivatives", self._sweep(s)))
        if config.residual_mode == "fused":
            phases.append(Phase("flux_residual", "flux_residual", self._flux_fused))
        else:
            for d, name in enumerate(K.DIRECTION_NAMES):
                phases.append(Phase(f"flux_{name}", "flux_residual", self._flux_pass(d)))
        phases.append(Phase("timestep", "timestep", self._timestep))
        phases.append(Phase("state_update", "state_update", self._state_update))
        self.phases = phases

    def _q_variables(self, p):
        K.q_variables(self.store, self.blocks[p].ids, self.gamma)

    def _q_init(self, p):
        b = self.blocks[p]
        K.q_derivatives_first(self.store, b.full, b.ids, self._bufs[0])

    def _sweep(self, s):
        def run(p):
            b = self.blocks[p]
            K.q_derivatives_sweep(self.store, b.full, b.ids, self._bufs[s - 1], self._bufs[s])
        return run

    def _flux_fused(self, p):
        K.flux_residual_fused(self.store, self.blocks[p], self.gamma, self.order)

    def _flux_pass(self, d):
        def run(p):
            K.flux_residual_pass(self.store, self.blocks[p], d, self.gamma, self.order)
        return run

    def _timestep(self, p):
        K.local_timestep(self.store, self.blocks[p], self.cfl, self.gamma)

    def _state_update(self, p):
        K.state_update(self.store, self.blocks[p], self.gamma, self.freestream, self.dU0)


def check_ghost_closure(plan, partitioning):
    """Every id a block kernel reads must be local or ghost for its partition."""
    for p, block in enumerate(plan.blocks):
        allowed = np.union1d(partitioning.locals[p], partitioning.ghosts[p])
        stray = np.setdiff1d(block.reads(), allowed)
        if stray.size:
            raise ProtocolError(f"partition {p} reads points outside locals and ghosts: {stray[:5]}")


def run_fixed_point(cloud, partitioning, config, schedule_seed=None, debug=False,
                    on_iteration=None):
    """Run ``config.n_iterations`` outer iterations in place on ``cloud.store``.

    The residue sequence and final fields are independent of the partition
    count, worker count, task order and storage layout.
    """
    n = cloud.n_points
    history = ConvergenceHistory(n)
    dU0 = np.zeros(n)
    plan = PhasePlan(cloud, partitioning, config, dU0)
    if debug:
        check_ghost_closure(plan, partitioning)
    adjacency = partitioning.adjacency()
    K.warm_up(cloud.store, plan.blocks[0], plan.buffers, config.gamma)
    t_start = time.perf_counter()
    with PhaseScheduler(adjacency, config.n_workers, schedule_seed, debug) as sched:
        for it in range(1, config.n_iterations + 1):
            t0 = time.perf_counter()
            try:
                sched.run(plan.phases)
            except PositivityError as exc:
                raise PositivityError(exc.point, it) from exc
            t1 = time.perf_counter()
            res = residue_norm(dU0, n)
            t2 = time.perf_counter()
            sched.kernel_seconds["residue"] += t2 - t1
            if not math.isfinite(res):
                raise PositivityError(int(np.flatnonzero(~np.isfinite(dU0))[0]), it)
            history.record(res, t2 - t0)
            if on_iteration is not None:
                on_iteration(it, res)
        history.kernel_seconds = dict(sched.kernel_seconds)
    history.total_seconds = time.perf_counter() - t_start
    return history
