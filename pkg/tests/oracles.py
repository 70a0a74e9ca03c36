"""Independent reference computations shared by the test modules."""
from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad


def half_range_moment(k, s, sign):
    """(1/sqrt(pi)) * integral of w^k exp(-(w - s)^2) over w*sign > 0."""
    if sign > 0:
        f = lambda w: w ** k * math.exp(-(w - s) ** 2)
        val, _ = quad(f, 0.0, math.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    else:
        f = lambda w: w ** k * math.exp(-(w - s) ** 2)
        val, _ = quad(f, -math.inf, 0.0, epsabs=0.0, epsrel=1e-13, limit=200)
    return val / math.sqrt(math.pi)


def maxwellian_split_flux(rho, u1, u2, p, axis, sign, gamma):
    """Half-range velocity moments of the 2D Maxwellian with internal energy.

    The molecular velocity normal to the axis is v = w / sqrt(beta); the
    tangential direction and the internal-energy variable integrate in
    closed form (Gaussian moments and the mean internal energy I0).
    """
    un, ut = (u1, u2) if axis == "x" else (u2, u1)
    beta = rho / (2.0 * p)
    s = un * math.sqrt(beta)
    rb = 1.0 / math.sqrt(beta)
    J1 = half_range_moment(1, s, sign) * rb
    J2 = half_range_moment(2, s, sign) * rb ** 2
    J3 = half_range_moment(3, s, sign) * rb ** 3
    I0 = (2.0 - gamma) / (2.0 * beta * (gamma - 1.0))
    tang = 0.5 * (ut * ut + 1.0 / (2.0 * beta))
    mass = rho * J1
    normal = rho * J2
    tangential = ut * mass
    energy = rho * (0.5 * J3 + (I0 + tang) * J1)
    out = np.empty(4)
    n_idx, t_idx = (1, 2) if axis == "x" else (2, 1)
    out[0] = mass
    out[n_idx] = normal
    out[t_idx] = tangential
    out[3] = energy
    return out


def dense_ls_solve(dx, dy, df):
    """Least squares through numpy's generic solver (normal equations avoided)."""
    A = np.column_stack([dx, dy])
    sol, *_ = np.linalg.lstsq(A, df, rcond=None)
    return sol[0], sol[1]


def random_states(rng, n, mach_max=3.0):
    """Primitive states (4, n) with sound speed-scaled velocities up to ``mach_max``."""
    rho = rng.uniform(0.1, 10.0, n)
    p = rng.uniform(0.1, 10.0, n)
    a = np.sqrt(1.4 * p / rho)
    mach = rng.uniform(0.0, mach_max, n)
    ang = rng.uniform(0.0, 2.0 * np.pi, n)
    return np.vstack([rho, mach * a * np.cos(ang), mach * a * np.sin(ang), p])
