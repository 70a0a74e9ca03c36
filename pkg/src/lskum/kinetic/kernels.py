"""Block kernels of the fixed-point iteration.

A :class:`Block` is any set of point ids (a partition, or the whole cloud)
together with the slices of the stencil tables its points need.  The
kernels hand the store's ``[component, point]`` table and those slices to
the compiled loops in :mod:`lskum.kinetic.compiled`; since each point is
computed from its own stencil alone, a point's bits never depend on which
other points share its block.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..cloud import DIRECTIONS, PointKind
from ..errors import DomainError, PositivityError, ReconstructionError
from ..layout import QX
from . import compiled

RESIDUAL_MODES = ("fused", "split4")
DIRECTION_NAMES = ("gx_plus", "gx_minus", "gy_plus", "gy_minus")


def _table_args(t):
    return t.nb, t.dx, t.dy, t.sxx, t.syy, t.sxy, t.det


@dataclass
class Block:
    ids: np.ndarray          # points owned by the block
    active: np.ndarray       # subset of ids that carry a flux residual
    full: object             # StencilTable over ids
    directions: tuple        # 4 StencilTables over active
    dmin: np.ndarray         # over ids
    kind: np.ndarray         # over ids, int64 PointKind codes
    nx: np.ndarray           # wall normals over ids (zero elsewhere)
    ny: np.ndarray

    @classmethod
    def build(cls, cloud, ids):
        geom = cloud.geometry
        ids = np.asarray(ids, dtype=np.int64)
        kind = cloud.kind[ids].astype(np.int64)
        act_cols = np.flatnonzero(kind != PointKind.OUTER)
        wall = kind == PointKind.WALL
        return cls(
            ids=ids,
            active=ids[act_cols],
            full=geom.full.take(ids),
            directions=tuple(t.take(ids[act_cols]) for t in geom.directions),
            dmin=geom.dmin[ids],
            kind=kind,
            nx=np.where(wall, cloud.nx[ids], 0.0),
            ny=np.where(wall, cloud.ny[ids], 0.0),
        )

    @property
    def wall_cols(self):
        return np.flatnonzero(self.kind == PointKind.WALL)

    @property
    def outer_cols(self):
        return np.flatnonzero(self.kind == PointKind.OUTER)

    def reads(self):
        """Every point id a kernel on this block may read."""
        return np.union1d(self.ids, self.full.nb.ravel())


class ArrayBuffer:
    """Scratch ``(8, n)`` array: qx in rows 0-3, qy in rows 4-7."""

    def __init__(self, n_points):
        self.array = np.zeros((8, n_points))
        self.offset = 0

    @property
    def qx(self):
        return self.array[0:4]

    @property
    def qy(self):
        return self.array[4:8]

    def get(self, idx):
        return self.qx[:, idx], self.qy[:, idx]


class StoreBuffer:
    """(qx, qy) living in the field store, which keeps them adjacent."""

    def __init__(self, store):
        self.store = store
        self.array = store.table
        self.offset = QX

    def get(self, idx):
        return self.store.get("qx", idx), self.store.get("qy", idx)


# ----------------------------------------------------------------- kernels

def q_variables(store, ids, gamma):
    bad = compiled.q_variables(store.table, ids, float(gamma))
    if bad != compiled.OK:
        raise DomainError(f"q_variables: non-positive density or pressure at point {ids[bad]}")


def q_derivatives_first(store, table, ids, dst):
    """First-order least-squares q-gradients from raw differences."""
    compiled.q_derivatives_first(store.table, ids, *_table_args(table), dst.array, dst.offset)


def q_derivatives_sweep(store, table, ids, src, dst):
    """One Jacobi inner iteration of the implicit q-gradient system.

    Neighbour and own gradients are read from ``src``; results go to ``dst``.
    """
    if src.array is dst.array:
        raise ValueError("a Jacobi sweep needs distinct source and destination buffers")
    compiled.q_derivatives_sweep(store.table, ids, *_table_args(table),
                                 src.array, src.offset, dst.array, dst.offset)


def _check_order(order):
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")


def flux_residual_fused(store, block, gamma, order=2):
    """All four split-flux derivatives in one pass; writes ``flux_res``."""
    _check_order(order)
    ids = block.active
    if ids.size == 0:
        return
    err = np.zeros(2, dtype=np.int64)
    args = [a for t in block.directions for a in _table_args(t)]
    if not compiled.flux_fused(store.table, ids, *args, float(gamma), order, err):
        raise ReconstructionError(int(err[0]), int(err[1]))


def flux_residual_pass(store, block, direction, gamma, order=2):
    """One of the four split passes; pass 0 initialises ``flux_res``."""
    _check_order(order)
    ids = block.active
    if ids.size == 0:
        return
    axis, sign, _ = DIRECTIONS[direction]
    err = np.zeros(2, dtype=np.int64)
    ok = compiled.flux_pass(store.table, ids, *_table_args(block.directions[direction]),
                            0 if axis == "x" else 1, sign, float(gamma), order,
                            direction > 0, err)
    if not ok:
        raise ReconstructionError(int(err[0]), int(err[1]))


def local_timestep(store, block, cfl, gamma):
    compiled.local_timestep(store.table, block.ids, block.dmin, float(cfl), float(gamma))


def state_update(store, block, gamma, freestream, dU0):
    """Update the block's primitives in place; record the mass change in ``dU0``."""
    fs = np.asarray(freestream, dtype=np.float64)
    bad = compiled.state_update(store.table, block.ids, block.kind, block.nx, block.ny,
                                fs, float(gamma), dU0)
    if bad != compiled.OK:
        raise PositivityError(int(block.ids[bad]))


def warm_up(store, block, buffers, gamma):
    """Compile (or load from cache) every kernel for these array types.

    Each kernel runs on an empty point set, so nothing is read or written;
    this keeps one-off compilation out of timed iterations.
    """
    F = store.table
    none = block.ids[:0]
    g = float(gamma)
    err = np.zeros(2, dtype=np.int64)
    full = block.full.take(np.arange(0))
    dirs = [a for t in block.directions for a in _table_args(t.take(np.arange(0)))]
    compiled.q_variables(F, none, g)
    for buf in buffers:
        compiled.q_derivatives_first(F, none, *_table_args(full), buf.array, buf.offset)
        for other in buffers:
            if other.array is not buf.array:
                compiled.q_derivatives_sweep(F, none, *_table_args(full), buf.array, buf.offset,
                                             other.array, other.offset)
    for order in (1, 2):
        compiled.flux_fused(F, none, *dirs, g, order, err)
        compiled.flux_pass(F, none, *dirs[:7], 0, 1, g, order, False, err)
    compiled.local_timestep(F, none, block.dmin[:0], 1.0, g)
    compiled.state_update(F, none, block.kind[:0], block.nx[:0], block.ny[:0],
                          np.zeros(4), g, np.zeros(store.n_points))
