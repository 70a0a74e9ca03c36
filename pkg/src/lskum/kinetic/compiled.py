"""Compiled per-point loops behind the block kernels.

Every kernel walks its points one at a time and, for each point, visits
stencil slots in table order with plain scalar float64 arithmetic.  No
value computed for one point depends on any other point of the block, and
there is no fast-math, so results are bit-for-bit independent of how
points are grouped into blocks and of the store layout.

``F`` is the store's ``[component, point]`` table; row offsets are those of
:mod:`lskum.layout`.  Stencil tables are slot-major ``(K, m)`` arrays whose
unused trailing slots point back at the owning point.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..layout import DELTA_T, FLUX_RES, PRIM, Q, QX, QY

# kernel status codes
OK = -1


@njit(cache=True)
def _prim_from_q(q0, q1, q2, q3, gam):
    beta = -0.5 * q3
    two_beta = 2.0 * beta
    u1 = q1 / two_beta
    u2 = q2 / two_beta
    rho = math.exp(q0 - math.log(beta) / (gam - 1.0) + beta * (u1 * u1 + u2 * u2))
    return rho, u1, u2, rho / two_beta


@njit(cache=True)
def _split_flux(rho, un, ut, p, sign, gam):
    """Half-range flux in (mass, normal, tangential, energy) order."""
    beta = 0.5 * rho / p
    s1 = un * math.sqrt(beta)
    A = 0.5 * math.erfc(-sign * s1)
    B = 0.5 * math.exp(-s1 * s1) / math.sqrt(math.pi * beta)
    if sign < 0:
        B = -B
    rhoE = p / (gam - 1.0) + 0.5 * rho * (un * un + ut * ut)
    mass = rho * (un * A + B)
    return (mass, (p + rho * un * un) * A + rho * un * B, ut * mass,
            (rhoE + p) * un * A + (rhoE + 0.5 * p) * B)


@njit(cache=True)
def _flux_of_q(q0, q1, q2, q3, axis, sign, gam):
    """Split flux of a q-state in x/y component order."""
    rho, u1, u2, p = _prim_from_q(q0, q1, q2, q3, gam)
    if axis == 0:
        g0, gn, gt, g3 = _split_flux(rho, u1, u2, p, sign, gam)
        return g0, gn, gt, g3
    g0, gn, gt, g3 = _split_flux(rho, u2, u1, p, sign, gam)
    return g0, gt, gn, g3


@njit(cache=True, nogil=True)
def q_variables(F, ids, gam):
    for r in range(ids.size):
        i = ids[r]
        rho = F[PRIM, i]
        u1 = F[PRIM + 1, i]
        u2 = F[PRIM + 2, i]
        p = F[PRIM + 3, i]
        if not (rho > 0.0 and p > 0.0):
            return r
        beta = 0.5 * rho / p
        F[Q, i] = math.log(rho) + math.log(beta) / (gam - 1.0) - beta * (u1 * u1 + u2 * u2)
        F[Q + 1, i] = 2.0 * beta * u1
        F[Q + 2, i] = 2.0 * beta * u2
        F[Q + 3, i] = -2.0 * beta
    return OK


@njit(cache=True, nogil=True)
def q_derivatives_first(F, ids, nb, dx, dy, sxx, syy, sxy, det, dst, dst_off):
    """First-order least-squares q-gradients from raw differences."""
    K = nb.shape[0]
    sx = np.empty(4)
    sy = np.empty(4)
    for r in range(ids.size):
        i = ids[r]
        for c in range(4):
            sx[c] = 0.0
            sy[c] = 0.0
        for j in range(K):
            n = nb[j, r]
            if n == i:
                break
            ddx = dx[j, r]
            ddy = dy[j, r]
            for c in range(4):
                dq = F[Q + c, n] - F[Q + c, i]
                sx[c] = sx[c] + ddx * dq
                sy[c] = sy[c] + ddy * dq
        for c in range(4):
            dst[dst_off + c, i] = (syy[r] * sx[c] - sxy[r] * sy[c]) / det[r]
            dst[dst_off + 4 + c, i] = (sxx[r] * sy[c] - sxy[r] * sx[c]) / det[r]


@njit(cache=True, nogil=True)
def q_derivatives_sweep(F, ids, nb, dx, dy, sxx, syy, sxy, det, src, src_off, dst, dst_off):
    """One Jacobi inner iteration: gradients read from ``src``, written to ``dst``.

    ``src`` and ``dst`` hold qx in rows ``off..off+3`` and qy in the next four.
    """
    K = nb.shape[0]
    sx = np.empty(4)
    sy = np.empty(4)
    for r in range(ids.size):
        i = ids[r]
        for c in range(4):
            sx[c] = 0.0
            sy[c] = 0.0
        for j in range(K):
            n = nb[j, r]
            if n == i:
                break
            ddx = dx[j, r]
            ddy = dy[j, r]
            for c in range(4):
                qt_i = F[Q + c, n] - 0.5 * (ddx * src[src_off + c, n] + ddy * src[src_off + 4 + c, n])
                qt_0 = F[Q + c, i] - 0.5 * (ddx * src[src_off + c, i] + ddy * src[src_off + 4 + c, i])
                dq = qt_i - qt_0
                sx[c] = sx[c] + ddx * dq
                sy[c] = sy[c] + ddy * dq
        for c in range(4):
            dst[dst_off + c, i] = (syy[r] * sx[c] - sxy[r] * sy[c]) / det[r]
            dst[dst_off + 4 + c, i] = (sxx[r] * sy[c] - sxy[r] * sx[c]) / det[r]


@njit(cache=True)
def _direction_derivative(F, i, r, nb, dx, dy, sxx, syy, sxy, det, axis, sign, gam, order,
                          sx, sy, err):
    """Least-squares derivative of one split flux at point ``i``.

    Returns False after recording ``(i, neighbour)`` in ``err`` when a
    reconstructed state is not admissible (q3 >= 0).
    """
    K = nb.shape[0]
    for c in range(4):
        sx[c] = 0.0
        sy[c] = 0.0
    if order == 1:
        h0, h1, h2, h3 = _flux_of_q(F[Q, i], F[Q + 1, i], F[Q + 2, i], F[Q + 3, i],
                                    axis, sign, gam)
    for j in range(K):
        n = nb[j, r]
        if n == i:
            break
        ddx = dx[j, r]
        ddy = dy[j, r]
        if order == 2:
            a0 = F[Q, n] - 0.5 * (ddx * F[QX, n] + ddy * F[QY, n])
            a1 = F[Q + 1, n] - 0.5 * (ddx * F[QX + 1, n] + ddy * F[QY + 1, n])
            a2 = F[Q + 2, n] - 0.5 * (ddx * F[QX + 2, n] + ddy * F[QY + 2, n])
            a3 = F[Q + 3, n] - 0.5 * (ddx * F[QX + 3, n] + ddy * F[QY + 3, n])
            b0 = F[Q, i] - 0.5 * (ddx * F[QX, i] + ddy * F[QY, i])
            b1 = F[Q + 1, i] - 0.5 * (ddx * F[QX + 1, i] + ddy * F[QY + 1, i])
            b2 = F[Q + 2, i] - 0.5 * (ddx * F[QX + 2, i] + ddy * F[QY + 2, i])
            b3 = F[Q + 3, i] - 0.5 * (ddx * F[QX + 3, i] + ddy * F[QY + 3, i])
            if not (a3 < 0.0 and b3 < 0.0):
                err[0] = i
                err[1] = n
                return False
            g0, g1, g2, g3 = _flux_of_q(a0, a1, a2, a3, axis, sign, gam)
            h0, h1, h2, h3 = _flux_of_q(b0, b1, b2, b3, axis, sign, gam)
        else:
            if not F[Q + 3, n] < 0.0:
                err[0] = i
                err[1] = n
                return False
            g0, g1, g2, g3 = _flux_of_q(F[Q, n], F[Q + 1, n], F[Q + 2, n], F[Q + 3, n],
                                        axis, sign, gam)
        d0 = g0 - h0
        d1 = g1 - h1
        d2 = g2 - h2
        d3 = g3 - h3
        sx[0] = sx[0] + ddx * d0
        sx[1] = sx[1] + ddx * d1
        sx[2] = sx[2] + ddx * d2
        sx[3] = sx[3] + ddx * d3
        sy[0] = sy[0] + ddy * d0
        sy[1] = sy[1] + ddy * d1
        sy[2] = sy[2] + ddy * d2
        sy[3] = sy[3] + ddy * d3
    if axis == 0:
        for c in range(4):
            sx[c] = (syy[r] * sx[c] - sxy[r] * sy[c]) / det[r]
    else:
        for c in range(4):
            sx[c] = (sxx[r] * sy[c] - sxy[r] * sx[c]) / det[r]
    return True


@njit(cache=True, nogil=True)
def flux_pass(F, ids, nb, dx, dy, sxx, syy, sxy, det, axis, sign, gam, order, accumulate, err):
    """One split-flux derivative for every point; sets or adds into ``flux_res``."""
    sx = np.empty(4)
    sy = np.empty(4)
    for r in range(ids.size):
        i = ids[r]
        if not _direction_derivative(F, i, r, nb, dx, dy, sxx, syy, sxy, det,
                                     axis, sign, gam, order, sx, sy, err):
            return False
        for c in range(4):
            if accumulate:
                F[FLUX_RES + c, i] = F[FLUX_RES + c, i] + sx[c]
            else:
                F[FLUX_RES + c, i] = sx[c]
    return True


@njit(cache=True, nogil=True)
def flux_fused(F, ids, nb0, dx0, dy0, sxx0, syy0, sxy0, det0,
               nb1, dx1, dy1, sxx1, syy1, sxy1, det1,
               nb2, dx2, dy2, sxx2, syy2, sxy2, det2,
               nb3, dx3, dy3, sxx3, syy3, sxy3, det3, gam, order, err):
    """All four split-flux derivatives per point, summed in Gx+, Gx-, Gy+, Gy- order."""
    sx = np.empty(4)
    sy = np.empty(4)
    res = np.empty(4)
    for r in range(ids.size):
        i = ids[r]
        if not _direction_derivative(F, i, r, nb0, dx0, dy0, sxx0, syy0, sxy0, det0,
                                     0, 1, gam, order, sx, sy, err):
            return False
        for c in range(4):
            res[c] = sx[c]
        if not _direction_derivative(F, i, r, nb1, dx1, dy1, sxx1, syy1, sxy1, det1,
                                     0, -1, gam, order, sx, sy, err):
            return False
        for c in range(4):
            res[c] = res[c] + sx[c]
        if not _direction_derivative(F, i, r, nb2, dx2, dy2, sxx2, syy2, sxy2, det2,
                                     1, 1, gam, order, sx, sy, err):
            return False
        for c in range(4):
            res[c] = res[c] + sx[c]
        if not _direction_derivative(F, i, r, nb3, dx3, dy3, sxx3, syy3, sxy3, det3,
                                     1, -1, gam, order, sx, sy, err):
            return False
        for c in range(4):
            F[FLUX_RES + c, i] = res[c] + sx[c]
    return True


@njit(cache=True, nogil=True)
def local_timestep(F, ids, dmin, cfl, gam):
    for r in range(ids.size):
        i = ids[r]
        rho = F[PRIM, i]
        u1 = F[PRIM + 1, i]
        u2 = F[PRIM + 2, i]
        p = F[PRIM + 3, i]
        F[DELTA_T, i] = cfl * dmin[r] / (math.sqrt(u1 * u1 + u2 * u2) + math.sqrt(gam * p / rho))


@njit(cache=True, nogil=True)
def state_update(F, ids, kind, nx, ny, fs, gam, dU0):
    """Forward-Euler update ``U - dt*res`` with wall tangency and far-field reset.

    ``kind`` holds 0/1/2 (interior/wall/outer) per column.  Writes the new
    primitives and each point's mass change ``dU0``; returns the first
    column whose density or pressure is not positive, else ``OK``.
    """
    for r in range(ids.size):
        i = ids[r]
        rho = F[PRIM, i]
        u1 = F[PRIM + 1, i]
        u2 = F[PRIM + 2, i]
        p = F[PRIM + 3, i]
        dt = F[DELTA_T, i]
        U0 = rho
        U1 = rho * u1
        U2 = rho * u2
        U3 = p / (gam - 1.0) + 0.5 * rho * (u1 * u1 + u2 * u2)
        N0 = U0 - dt * F[FLUX_RES, i]
        N1 = U1 - dt * F[FLUX_RES + 1, i]
        N2 = U2 - dt * F[FLUX_RES + 2, i]
        N3 = U3 - dt * F[FLUX_RES + 3, i]
        v1 = N1 / N0
        v2 = N2 / N0
        pn = (gam - 1.0) * (N3 - 0.5 * N0 * (v1 * v1 + v2 * v2))
        if not (N0 > 0.0 and pn > 0.0):
            return r
        if kind[r] == 1:
            un = v1 * nx[r] + v2 * ny[r]
            v1 = v1 - un * nx[r]
            v2 = v2 - un * ny[r]
        elif kind[r] == 2:
            N0 = fs[0]
            v1 = fs[1]
            v2 = fs[2]
            pn = fs[3]
        F[PRIM, i] = N0
        F[PRIM + 1, i] = v1
        F[PRIM + 2, i] = v2
        F[PRIM + 3, i] = pn
        dU0[i] = N0 - U0
    return OK
