"""Single-point LSKUM operations written straight from the formulas.

These read the cloud's field store but never write it.  They share no code
with the compiled block kernels beyond the stencil definitions, which makes
them the reference the kernels are tested against.
"""
from __future__ import annotations

import math

import numpy as np

from ..cloud import DIRECTIONS, PointKind, split_stencils
from ..errors import PositivityError, ReconstructionError
from ..reduction import deterministic_reduce
from .physics import (
    GasModel,
    _gamma,
    conserved_from_primitives,
    kfvs_split_flux,
    ls_derivatives,
    primitives_from_conserved,
    primitives_from_q,
)

RESIDUAL_MODES = ("fused", "split4")


def _stored(cloud, field, ids):
    return cloud.store.get(field, np.asarray(ids, dtype=np.int64)).T   # (n, 4)


def q_derivatives(cloud, p, n_inner=1):
    """q-gradients at ``p`` from the stored q, qx and qy fields.

    ``n_inner=0`` gives the first-order estimate from raw differences.
    Otherwise ``n_inner`` corrected updates are applied at ``p``, starting
    from its stored gradients, with the neighbours' stored gradients fixed.
    """
    if n_inner < 0:
        raise ValueError("n_inner must be non-negative")
    nb = cloud.nbhs[p]
    dx, dy = cloud.deltas(p)
    q0 = _stored(cloud, "q", [p])[0]
    dq = _stored(cloud, "q", nb) - q0
    if n_inner == 0:
        return ls_derivatives(dx, dy, dq, point=p)
    qxn = _stored(cloud, "qx", nb)
    qyn = _stored(cloud, "qy", nb)
    qx0 = _stored(cloud, "qx", [p])[0]
    qy0 = _stored(cloud, "qy", [p])[0]
    for _ in range(n_inner):
        rows = []
        for k in range(len(nb)):
            qt_i = dq[k] + q0 - 0.5 * (dx[k] * qxn[k] + dy[k] * qyn[k])
            qt_0 = q0 - 0.5 * (dx[k] * qx0 + dy[k] * qy0)
            rows.append(qt_i - qt_0)
        qx0, qy0 = ls_derivatives(dx, dy, np.array(rows), point=p)
    return qx0, qy0


def _split_derivative(cloud, p, direction, g, order):
    axis, sign, name = DIRECTIONS[direction]
    members = np.asarray(getattr(split_stencils(cloud, p), name), dtype=np.int64)
    dx = cloud.x[members] - cloud.x[p]
    dy = cloud.y[members] - cloud.y[p]
    q0 = _stored(cloud, "q", [p])[0]
    qn = _stored(cloud, "q", members)
    if order == 2:
        qx0 = _stored(cloud, "qx", [p])[0]
        qy0 = _stored(cloud, "qy", [p])[0]
        qxn = _stored(cloud, "qx", members)
        qyn = _stored(cloud, "qy", members)
    dG = []
    for k, j in enumerate(members):
        if order == 2:
            qt_i = qn[k] - 0.5 * (dx[k] * qxn[k] + dy[k] * qyn[k])
            qt_0 = q0 - 0.5 * (dx[k] * qx0 + dy[k] * qy0)
        else:
            qt_i, qt_0 = qn[k], q0
        if not (qt_i[3] < 0 and qt_0[3] < 0):
            raise ReconstructionError(p, int(j))
        G_i = kfvs_split_flux(primitives_from_q(qt_i, g), axis, sign, g)
        G_0 = kfvs_split_flux(primitives_from_q(qt_0, g), axis, sign, g)
        dG.append(G_i - G_0)
    fx, fy = ls_derivatives(dx, dy, np.array(dG), point=p)
    return fx if axis == "x" else fy


def flux_residual(cloud, p, g=GasModel(), mode="fused", order=2):
    """Sum of the four split-flux derivatives at ``p`` (zero for far-field points).

    Both modes add the four derivatives in Gx+, Gx-, Gy+, Gy- order.
    """
    if mode not in RESIDUAL_MODES:
        raise ValueError(f"mode must be one of {RESIDUAL_MODES}, got {mode!r}")
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    if cloud.kind[p] == PointKind.OUTER:
        return np.zeros(4)
    res = _split_derivative(cloud, p, 0, g, order)
    for d in (1, 2, 3):
        res = res + _split_derivative(cloud, p, d, g, order)
    return res


def local_timestep(cloud, p, cfl, g=GasModel()):
    gamma = _gamma(g)
    if not cfl > 0:
        raise ValueError("cfl must be positive")
    rho, u1, u2, pr = _stored(cloud, "prim", [p])[0]
    dmin = cloud.geometry.dmin[p]
    return cfl * dmin / (math.sqrt(u1 * u1 + u2 * u2) + math.sqrt(gamma * pr / rho))


def state_update(cloud, p, dt, residual, g=GasModel(), freestream=None):
    """Return ``(new_primitives, dU)`` for point ``p`` without touching the store.

    Wall points have their normal velocity removed; far-field points are
    reset to ``freestream``.  ``dU`` is the conserved change actually applied.
    """
    kind = cloud.kind[p]
    if kind == PointKind.OUTER and freestream is None:
        raise ValueError("far-field points need the free-stream state")
    prim = _stored(cloud, "prim", [p])[0]
    U = conserved_from_primitives(prim, g)
    U_new = U - dt * np.asarray(residual, dtype=np.float64)
    new = primitives_from_conserved(U_new, g, check=False)
    if not (new[0] > 0 and new[3] > 0):
        raise PositivityError(p)
    if kind == PointKind.WALL:
        un = new[1] * cloud.nx[p] + new[2] * cloud.ny[p]
        new[1] = new[1] - un * cloud.nx[p]
        new[2] = new[2] - un * cloud.ny[p]
    elif kind == PointKind.OUTER:
        new = np.asarray(freestream, dtype=np.float64).copy()
    return new, conserved_from_primitives(new, g) - U


def residue_norm(dU0, n_points):
    """``sqrt(sum dU0^2) / n_points`` with the order-fixed reduction."""
    if n_points <= 0:
        raise ValueError("n_points must be positive")
    d = np.asarray(dU0, dtype=np.float64)
    return math.sqrt(deterministic_reduce(d * d, "sum")) / n_points
