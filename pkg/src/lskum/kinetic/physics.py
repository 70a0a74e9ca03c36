"""Pointwise gas dynamics: state transforms, full and kinetic split fluxes.

Every function accepts state arrays whose leading axis holds the four
components, so the same code serves a single state ``(4,)`` and a batch
``(4, ...)``.  All arithmetic is float64.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import erfc

from ..errors import DomainError, SingularStencilError

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class GasModel:
    gamma: float = 1.4

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")


class PrimitiveState(NamedTuple):
    rho: float
    u1: float
    u2: float
    p: float


class QState(NamedTuple):
    q0: float
    q1: float
    q2: float
    q3: float


class ConservedState(NamedTuple):
    U0: float
    U1: float
    U2: float
    U3: float


class FluxVector(NamedTuple):
    f0: float
    f1: float
    f2: float
    f3: float


AXES = ("x", "y")
SIGNS = (+1, -1)


def _as_state(s):
    a = np.asarray(s, dtype=np.float64)
    if a.shape[:1] != (4,):
        raise ValueError(f"state arrays need a leading axis of length 4, got {a.shape}")
    return a


def _gamma(g):
    return g.gamma if isinstance(g, GasModel) else float(g)


def _check_positive(rho, p, what):
    if not (np.all(rho > 0) and np.all(p > 0)):
        raise DomainError(f"{what}: density and pressure must be positive")


def q_from_primitives(s, g=GasModel()):
    s = _as_state(s)
    gam = _gamma(g)
    rho, u1, u2, p = s
    _check_positive(rho, p, "q_from_primitives")
    beta = 0.5 * rho / p
    q = np.empty_like(s)
    q[0] = np.log(rho) + np.log(beta) / (gam - 1.0) - beta * (u1 * u1 + u2 * u2)
    q[1] = 2.0 * beta * u1
    q[2] = 2.0 * beta * u2
    q[3] = -2.0 * beta
    return q


def primitives_from_q(q, g=GasModel()):
    q = _as_state(q)
    if not np.all(q[3] < 0):
        raise DomainError("primitives_from_q: q3 must be negative")
    return _primitives_from_q_unchecked(q, _gamma(g))


def _primitives_from_q_unchecked(q, gam):
    beta = -0.5 * q[3]
    two_beta = 2.0 * beta
    u1 = q[1] / two_beta
    u2 = q[2] / two_beta
    out = np.empty_like(q)
    rho = np.exp(q[0] - np.log(beta) / (gam - 1.0) + beta * (u1 * u1 + u2 * u2))
    out[0] = rho
    out[1] = u1
    out[2] = u2
    out[3] = rho / two_beta
    return out


def conserved_from_primitives(s, g=GasModel()):
    s = _as_state(s)
    gam = _gamma(g)
    rho, u1, u2, p = s
    U = np.empty_like(s)
    U[0] = rho
    U[1] = rho * u1
    U[2] = rho * u2
    U[3] = p / (gam - 1.0) + 0.5 * rho * (u1 * u1 + u2 * u2)
    return U


def primitives_from_conserved(U, g=GasModel(), check=True):
    U = _as_state(U)
    gam = _gamma(g)
    rho = U[0]
    out = np.empty_like(U)
    u1 = U[1] / rho
    u2 = U[2] / rho
    out[0] = rho
    out[1] = u1
    out[2] = u2
    out[3] = (gam - 1.0) * (U[3] - 0.5 * rho * (u1 * u1 + u2 * u2))
    if check:
        _check_positive(out[0], out[3], "primitives_from_conserved")
    return out


def _normal_tangential(s, axis):
    rho, u1, u2, p = s
    if axis == "x":
        return rho, u1, u2, p
    if axis == "y":
        return rho, u2, u1, p
    raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")


def full_flux(s, axis, g=GasModel()):
    """Inviscid Euler flux along ``axis``."""
    s = _as_state(s)
    gam = _gamma(g)
    rho, un, ut, p = _normal_tangential(s, axis)
    rhoE = p / (gam - 1.0) + 0.5 * rho * (un * un + ut * ut)
    F = np.empty_like(s)
    n_idx, t_idx = (1, 2) if axis == "x" else (2, 1)
    F[0] = rho * un
    F[n_idx] = p + rho * un * un
    F[t_idx] = rho * un * ut
    F[3] = (rhoE + p) * un
    return F


def kfvs_split_flux(s, axis, sign, g=GasModel()):
    """Half-range (CIR) moment of the Maxwellian flux, ``sign`` = +1 or -1.

    With ``s1 = u_n sqrt(beta)`` the half-range weights are
    ``A = (1 + sign*erf(s1))/2`` and ``B = exp(-s1^2) / (2 sqrt(pi beta))``.
    ``A`` is evaluated as ``erfc(-sign*s1)/2`` so the small, upstream half
    keeps full relative precision instead of cancelling against 1.
    """
    s = _as_state(s)
    return _split_flux_unchecked(s, axis, sign, _gamma(g))


def _split_flux_unchecked(s, axis, sign, gam):
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    rho, un, ut, p = _normal_tangential(s, axis)
    beta = 0.5 * rho / p
    s1 = un * np.sqrt(beta)
    A = 0.5 * erfc(-sign * s1)
    B = 0.5 * np.exp(-s1 * s1) / np.sqrt(np.pi * beta)
    if sign < 0:
        B = -B
    rhoE = p / (gam - 1.0) + 0.5 * rho * (un * un + ut * ut)
    mass = rho * (un * A + B)
    G = np.empty_like(s)
    n_idx, t_idx = (1, 2) if axis == "x" else (2, 1)
    G[0] = mass
    G[n_idx] = (p + rho * un * un) * A + rho * un * B
    G[t_idx] = ut * mass
    G[3] = (rhoE + p) * un * A + (rhoE + 0.5 * p) * B
    return G


def ls_derivatives(dx, dy, df, det_tol=0.0, point=None):
    """Least-squares gradient from neighbour offsets and differences.

    ``dx``, ``dy`` have shape ``(n,)``; ``df`` has shape ``(n,)`` or
    ``(n, ncomp)``.  Returns ``(f_x, f_y)`` with the trailing shape of ``df``.
    """
    dx = np.asarray(dx, dtype=np.float64)
    dy = np.asarray(dy, dtype=np.float64)
    df = np.asarray(df, dtype=np.float64)
    if dx.ndim != 1 or dx.shape != dy.shape or df.shape[:1] != dx.shape:
        raise ValueError("dx, dy and df must share their leading length")
    if dx.size < 2:
        raise SingularStencilError("least squares needs at least 2 neighbours", point)
    sxx = syy = sxy = 0.0
    sxf = np.zeros(df.shape[1:])
    syf = np.zeros(df.shape[1:])
    for i in range(dx.size):
        sxx += dx[i] * dx[i]
        syy += dy[i] * dy[i]
        sxy += dx[i] * dy[i]
        sxf = sxf + dx[i] * df[i]
        syf = syf + dy[i] * df[i]
    det = sxx * syy - sxy * sxy
    if not det > det_tol:
        where = "" if point is None else f" at point {point}"
        raise SingularStencilError(f"singular least-squares stencil{where} (det={det:g})", point)
    fx = (syy * sxf - sxy * syf) / det
    fy = (sxx * syf - sxy * sxf) / det
    return fx, fy


def stencil_determinant(dx, dy):
    dx = np.asarray(dx, dtype=np.float64)
    dy = np.asarray(dy, dtype=np.float64)
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    sxy = float(np.dot(dx, dy))
    return sxx * syy - sxy * sxy
