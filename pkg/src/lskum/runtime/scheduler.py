"""Dependency-driven execution of per-partition phase tasks.

Task ``(k, p)`` (phase ``k`` on partition ``p``) may start once phase
``k-1`` has finished on ``p`` and on every partition adjacent to ``p``.
Adjacency is symmetric, which covers both directions of data flow: ghost
values are complete before they are read (read-after-write), and no
partition overwrites a field a neighbour is still reading
(write-after-read).  There is no global barrier between phases.
"""
from __future__ import annotations

import random
import threading
import time
from collections import defaultdict
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass
from typing import Callable

from ..errors import ProtocolError


@dataclass(frozen=True)
class Phase:
    name: str           # unique label, e.g. "q_inner_2"
    kernel: str         # timing bucket, e.g. "q_derivatives"
    run: Callable       # run(part_index)


class PhaseScheduler:
    def __init__(self, adjacency, n_workers=1, shuffle_seed=None, debug=False):
        self.n_parts = len(adjacency)
        self.deps = [sorted(set(a) | {p}) for p, a in enumerate(adjacency)]
        self.n_workers = int(n_workers)
        self.rng = None if shuffle_seed is None else random.Random(shuffle_seed)
        self.debug = debug
        self._pool = ThreadPoolExecutor(self.n_workers) if self.n_workers > 1 else None
        self.kernel_seconds = defaultdict(float)
        self._lock = threading.Lock()

    def close(self):
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def run(self, phases):
        """Execute every phase on every partition; returns the completion order."""
        n_phases = len(phases)
        if n_phases == 0:
            return []
        waiting = {(k, p): len(self.deps[p]) if k else 0
                   for k in range(n_phases) for p in range(self.n_parts)}
        completed = [0] * self.n_parts
        ready = [(0, p) for p in range(self.n_parts)]
        order = []

        def finish(task):
            k, p = task
            completed[p] = k + 1
            order.append(task)
            if k + 1 < n_phases:
                for r in self.deps[p]:
                    nxt = (k + 1, r)
                    waiting[nxt] -= 1
                    if waiting[nxt] == 0:
                        ready.append(nxt)

        def pick():
            if self.rng is not None:
                return ready.pop(self.rng.randrange(len(ready)))
            return ready.pop(0)

        if self._pool is None:
            while ready:
                task = pick()
                self._execute(phases, task, completed)
                finish(task)
        else:
            running = {}
            while ready or running:
                while ready:
                    task = pick()
                    running[self._pool.submit(self._execute, phases, task, completed)] = task
                done, _ = wait(running, return_when=FIRST_COMPLETED)
                for fut in done:
                    task = running.pop(fut)
                    try:
                        fut.result()
                    except BaseException:
                        for f in running:
                            f.cancel()
                        wait(running)
                        raise
                    finish(task)
        return order

    def _execute(self, phases, task, completed):
        k, p = task
        if self.debug:
            self._check_visibility(k, p, completed)
        phase = phases[k]
        t0 = time.perf_counter()
        phase.run(p)
        dt = time.perf_counter() - t0
        with self._lock:
            self.kernel_seconds[phase.kernel] += dt
            if phase.kernel == "flux_residual" and phase.name != "flux_residual":
                self.kernel_seconds[phase.name] += dt

    def _check_visibility(self, k, p, completed):
        for r in self.deps[p]:
            c = completed[r]
            if c < k or c > k + 1 or (r == p and c != k):
                raise ProtocolError(
                    f"phase {k} on partition {p} started while partition {r} "
                    f"had completed {c} phases"
                )
