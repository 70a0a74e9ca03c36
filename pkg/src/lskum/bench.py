"""Initial conditions and benchmark metrics (RDP, relative performance)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cloud import PointKind
from .config import freestream_state
from .runtime.driver import KERNELS

SPLIT_PASSES = ("flux_gx_plus", "flux_gx_minus", "flux_gy_plus", "flux_gy_minus")


def freestream_init(cloud, mach, aoa_deg, g=1.4):
    gamma = getattr(g, "gamma", g)
    state = np.asarray(freestream_state(mach, aoa_deg, gamma))
    cloud.store.set("prim", None, np.repeat(state[:, None], cloud.n_points, axis=1))


def apply_bump(cloud, amplitude=0.05, center=None, radius=0.1):
    """Scale density and pressure by ``1 + amplitude*exp(-(r/radius)^2)`` off the far field."""
    if center is None:
        center = (0.5 * (cloud.x.min() + cloud.x.max()), 0.5 * (cloud.y.min() + cloud.y.max()))
    r2 = (cloud.x - center[0]) ** 2 + (cloud.y - center[1]) ** 2
    factor = 1.0 + amplitude * np.exp(-r2 / radius ** 2)
    factor[cloud.kind == PointKind.OUTER] = 1.0
    prim = cloud.store.get("prim")
    prim[0] *= factor
    prim[3] *= factor
    cloud.store.set("prim", None, prim)


def rdp(wall_seconds, iterations, n_points):
    """Rate of data processing: wall seconds per iteration per point."""
    if iterations <= 0 or n_points <= 0:
        raise ZeroDivisionError("iterations and n_points must be positive")
    return wall_seconds / iterations / n_points


def relative_performance(rdp_test, rdp_reference):
    if rdp_reference == 0:
        raise ZeroDivisionError("reference RDP is zero")
    return rdp_test / rdp_reference


@dataclass
class BenchReport:
    total_seconds: float
    iterations: int
    n_points: int
    kernel_seconds: dict = field(default_factory=dict)
    kernel_rdp: dict = field(default_factory=dict)
    label: str = ""

    @property
    def rdp(self):
        return rdp(self.total_seconds, self.iterations, self.n_points)

    @classmethod
    def from_history(cls, history, label=""):
        """Kernel times are task times, scaled down when worker overlap makes
        their sum exceed the wall clock."""
        raw = dict(history.kernel_seconds)
        busy = sum(raw.get(k, 0.0) for k in KERNELS)
        scale = 1.0
        if busy > history.total_seconds > 0:
            scale = history.total_seconds / busy
        seconds = {k: raw.get(k, 0.0) * scale for k in KERNELS}
        passes = {k: raw[k] * scale for k in SPLIT_PASSES if k in raw}
        it, n = history.iterations, history.n_points
        kernel_rdp = {k: rdp(v, it, n) for k, v in seconds.items()} if it else {}
        if passes and it:
            pass_rdp = {k: rdp(v, it, n) for k, v in passes.items()}
            kernel_rdp.update(pass_rdp)
            total = 0.0
            for k in SPLIT_PASSES:
                total += pass_rdp[k]
            kernel_rdp["flux_residual"] = total
            seconds.update(passes)
        return cls(history.total_seconds, it, n, seconds, kernel_rdp, label)

    def ranked_kernels(self):
        return sorted(KERNELS, key=lambda k: self.kernel_rdp.get(k, 0.0), reverse=True)

    def summary(self):
        lines = [f"{self.label or 'run'}: {self.iterations} iterations, {self.n_points} points, "
                 f"{self.total_seconds:.6g} s, RDP {self.rdp:.6g}"]
        for k in KERNELS:
            lines.append(f"  {k:<14s} {self.kernel_seconds.get(k, 0.0):12.6g} s  "
                         f"RDP {self.kernel_rdp.get(k, 0.0):.6g}")
        return "\n".join(lines)
