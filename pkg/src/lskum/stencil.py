"""Padded, slot-major stencil tables consumed by the vectorised kernels.

Each table holds ``K`` neighbour slots per point stored as ``(K, n)`` arrays
so that one slot across many points is contiguous.  Unused slots point back
at the owning point with zero offsets, which makes their contribution to
every least-squares sum exactly zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cloud import DIRECTIONS


@dataclass
class StencilTable:
    nb: np.ndarray    # (K, m) int64
    dx: np.ndarray    # (K, m)
    dy: np.ndarray    # (K, m)
    sxx: np.ndarray   # (m,)
    syy: np.ndarray
    sxy: np.ndarray
    det: np.ndarray

    @property
    def width(self):
        return self.nb.shape[0]

    @classmethod
    def build(cls, cloud, rows, members):
        """``members[r]`` lists the neighbour ids of point ``rows[r]`` in slot order."""
        m = len(rows)
        K = max((len(mm) for mm in members), default=0)
        K = max(K, 1)
        nb = np.repeat(np.asarray(rows, dtype=np.int64)[None, :], K, axis=0)
        for r, mm in enumerate(members):
            nb[: len(mm), r] = mm
        own = np.asarray(rows, dtype=np.int64)
        dx = cloud.x[nb] - cloud.x[own]
        dy = cloud.y[nb] - cloud.y[own]
        # padding slots are self references; force exact zeros
        sxx = np.zeros(m)
        syy = np.zeros(m)
        sxy = np.zeros(m)
        for j in range(K):
            sxx = sxx + dx[j] * dx[j]
            syy = syy + dy[j] * dy[j]
            sxy = sxy + dx[j] * dy[j]
        det = sxx * syy - sxy * sxy
        return cls(nb, np.ascontiguousarray(dx), np.ascontiguousarray(dy), sxx, syy, sxy, det)

    def take(self, cols):
        """Sub-table for a subset of this table's points (column indices)."""
        return StencilTable(
            np.ascontiguousarray(self.nb[:, cols]),
            np.ascontiguousarray(self.dx[:, cols]),
            np.ascontiguousarray(self.dy[:, cols]),
            self.sxx[cols], self.syy[cols], self.sxy[cols], self.det[cols],
        )


class StencilGeometry:
    """Full-stencil table for every point plus one table per split-flux direction.

    Direction tables cover every point; callers restrict them to the points
    that actually carry a flux residual.
    """

    def __init__(self, full, directions, dmin):
        self.full = full
        self.directions = directions
        self.dmin = dmin

    @classmethod
    def from_cloud(cls, cloud):
        n = cloud.n_points
        rows = np.arange(n)
        full = StencilTable.build(cloud, rows, cloud.nbhs)
        directions = []
        for axis, _sign, stencil in DIRECTIONS:
            members = []
            for p in range(n):
                nb = cloud.nbhs[p]
                d = (cloud.x[nb] - cloud.x[p]) if axis == "x" else (cloud.y[nb] - cloud.y[p])
                mask = d <= 0 if stencil.endswith("neg") else d >= 0
                members.append(nb[mask])
            directions.append(StencilTable.build(cloud, rows, members))
        r2 = full.dx * full.dx + full.dy * full.dy
        # padding slots have r2 == 0; exclude them
        r2 = np.where(np.arange(full.width)[:, None] < np.array([len(nb) for nb in cloud.nbhs]),
                      r2, np.inf)
        dmin = np.sqrt(r2.min(axis=0))
        return cls(full, tuple(directions), dmin)
