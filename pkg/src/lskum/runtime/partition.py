"""Domain decomposition into owned (local) and ghost point sets."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Partitioning:
    n_parts: int
    color: np.ndarray   # partition id per point
    locals: list        # owned ids per partition, ascending
    ghosts: list        # referenced non-owned ids per partition, ascending

    def adjacency(self):
        """Partitions each partition exchanges data with, in either direction."""
        adj = [set() for _ in range(self.n_parts)]
        for p in range(self.n_parts):
            for r in np.unique(self.color[self.ghosts[p]]):
                adj[p].add(int(r))
                adj[int(r)].add(p)
        return [sorted(a) for a in adj]

    def owners_of_ghosts(self, p):
        return sorted(int(r) for r in np.unique(self.color[self.ghosts[p]]))


def partition_cloud(cloud, n_parts):
    """Recursive coordinate bisection.

    Each cut splits along the longer bounding-box axis (x on a tie), ordering
    points by coordinate then id, with part counts divided as evenly as
    possible.
    """
    n = cloud.n_points
    if not 1 <= n_parts <= n:
        raise ValueError(f"n_parts must lie in [1, {n}], got {n_parts}")
    parts = []
    _bisect(np.arange(n), n_parts, cloud.x, cloud.y, parts)
    color = np.empty(n, dtype=np.int64)
    for c, ids in enumerate(parts):
        color[ids] = c
    return make_partitioning(cloud, color, n_parts)


def _bisect(ids, n_parts, x, y, out):
    if n_parts == 1:
        out.append(np.sort(ids))
        return
    xs, ys = x[ids], y[ids]
    coord = xs if np.ptp(xs) >= np.ptp(ys) else ys
    ids = ids[np.lexsort((ids, coord))]
    left_parts = n_parts // 2
    cut = ids.size * left_parts // n_parts
    _bisect(ids[:cut], left_parts, x, y, out)
    _bisect(ids[cut:], n_parts - left_parts, x, y, out)


def make_partitioning(cloud, color, n_parts=None):
    color = np.asarray(color, dtype=np.int64)
    if n_parts is None:
        n_parts = int(color.max()) + 1
    locals_ = [np.flatnonzero(color == c) for c in range(n_parts)]
    if any(loc.size == 0 for loc in locals_):
        raise ValueError("every partition must own at least one point")
    ghosts = []
    for loc in locals_:
        if cloud.nbhs is None:
            ghosts.append(np.zeros(0, dtype=np.int64))
            continue
        referenced = np.unique(np.concatenate([cloud.nbhs[i] for i in loc]))
        ghosts.append(np.setdiff1d(referenced, loc))
    return Partitioning(n_parts, color, locals_, ghosts)


def exchange_ghosts(store, field, partitioning):
    """Per-partition read snapshot of ``field`` at its ghost points.

    Shared memory makes this a visibility guarantee rather than a transfer:
    the returned values are exactly the owners' current values.
    """
    return [
        {"ids": g, "values": store.get(field, g)}
        for g in partitioning.ghosts
    ]
