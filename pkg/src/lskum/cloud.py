"""Point clouds: data model, grid-file I/O, generators and stencils."""
from __future__ import annotations

import enum
import io
import math
import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from .errors import CloudFormatError
from .layout import store_create


class PointKind(enum.IntEnum):
    INTERIOR = 0
    WALL = 1
    OUTER = 2


@dataclass(frozen=True)
class PointRecord:
    id: int
    x: float
    y: float
    kind: PointKind
    nx: float
    ny: float
    nbhs: tuple


@dataclass(frozen=True)
class SplitStencils:
    xpos: list
    xneg: list
    ypos: list
    yneg: list


# Split stencil feeding each split-flux derivative (upwind side).
# Gx+ carries information from -x, so it is differenced over xneg, etc.
DIRECTIONS = (
    ("x", +1, "xneg"),
    ("x", -1, "xpos"),
    ("y", +1, "yneg"),
    ("y", -1, "ypos"),
)
SPLIT_NAMES = ("xpos", "xneg", "ypos", "yneg")


class PointCloud:
    """Geometry, connectivity and the per-point field store of a domain.

    Geometry and connectivity are treated as immutable once built; only the
    contents of ``store`` change during a solve.
    """

    def __init__(self, x, y, kind, nx, ny, nbhs=None, layout="soa"):
        self.x = np.ascontiguousarray(x, dtype=np.float64)
        self.y = np.ascontiguousarray(y, dtype=np.float64)
        self.kind = np.ascontiguousarray(kind, dtype=np.int8)
        self.nx = np.ascontiguousarray(nx, dtype=np.float64)
        self.ny = np.ascontiguousarray(ny, dtype=np.float64)
        n = self.x.size
        for name in ("y", "kind", "nx", "ny"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} must have length {n}")
        self.nbhs = None if nbhs is None else [np.asarray(nb, dtype=np.int64) for nb in nbhs]
        self.store = store_create(layout, n)

    @property
    def n_points(self):
        return self.x.size

    def __len__(self):
        return self.n_points

    @property
    def points(self):
        return [self.record(i) for i in range(self.n_points)]

    def record(self, i):
        nb = () if self.nbhs is None else tuple(int(j) for j in self.nbhs[i])
        return PointRecord(
            i, float(self.x[i]), float(self.y[i]), PointKind(int(self.kind[i])),
            float(self.nx[i]), float(self.ny[i]), nb,
        )

    def use_layout(self, layout):
        """Swap in a fresh store of another layout, carrying field values over."""
        new = store_create(layout, self.n_points)
        new.copy_from(self.store)
        self.store = new
        return self

    def copy(self, layout=None):
        c = PointCloud(self.x, self.y, self.kind, self.nx, self.ny, self.nbhs,
                       layout=layout or self.store.layout)
        c.store.copy_from(self.store)
        return c

    def same_geometry(self, other):
        if self.n_points != other.n_points:
            return False
        for name in ("x", "y", "kind", "nx", "ny"):
            if not np.array_equal(getattr(self, name), getattr(other, name)):
                return False
        if (self.nbhs is None) != (other.nbhs is None):
            return False
        if self.nbhs is not None:
            return all(np.array_equal(a, b) for a, b in zip(self.nbhs, other.nbhs))
        return True

    def deltas(self, p):
        nb = self.nbhs[p]
        return self.x[nb] - self.x[p], self.y[nb] - self.y[p]

    @cached_property
    def geometry(self):
        if self.nbhs is None:
            raise ValueError("stencils not built")
        from .stencil import StencilGeometry
        return StencilGeometry.from_cloud(self)

    def _invalidate(self):
        self.__dict__.pop("geometry", None)


# ---------------------------------------------------------------- file I/O

def read_point_cloud(source, layout="soa"):
    """Parse the line-oriented grid format from a path, text or byte stream."""
    if hasattr(source, "read"):
        data = source.read()
    elif isinstance(source, bytes) or (isinstance(source, str) and "\n" in source):
        data = source
    else:
        with open(os.fspath(source), "rb") as fh:
            data = fh.read()
    if isinstance(data, bytes):
        data = data.decode("ascii")
    lines = [(no, ln.split()) for no, ln in enumerate(data.splitlines(), start=1)]
    lines = [(no, toks) for no, toks in lines if toks]
    if not lines:
        raise CloudFormatError("empty grid file", 1)
    no, header = lines[0]
    if len(header) != 1:
        raise CloudFormatError("malformed header: expected a single n_points field", no)
    try:
        n = int(header[0])
    except ValueError:
        raise CloudFormatError(f"malformed header: {header[0]!r} is not an integer", no) from None
    if n <= 0:
        raise CloudFormatError("malformed header: n_points must be positive", no)
    records = lines[1:]
    if len(records) != n:
        raise CloudFormatError(
            f"record count mismatch: header declares {n}, found {len(records)}",
            records[n][0] if len(records) > n else no,
        )
    x = np.empty(n)
    y = np.empty(n)
    kind = np.empty(n, dtype=np.int8)
    nx = np.empty(n)
    ny = np.empty(n)
    nbhs = []
    for expect, (no, toks) in enumerate(records):
        try:
            pid = int(toks[0])
            x[expect], y[expect] = float(toks[1]), float(toks[2])
            k = int(toks[3])
            nx[expect], ny[expect] = float(toks[4]), float(toks[5])
            count = int(toks[6])
            nb = [int(t) for t in toks[7:]]
        except (IndexError, ValueError):
            raise CloudFormatError("malformed record", no) from None
        if pid != expect:
            raise CloudFormatError(f"ids must be 0-based and ascending: expected {expect}, got {pid}", no)
        if k not in (0, 1, 2):
            raise CloudFormatError(f"unknown point kind {k}", no)
        if count != len(nb):
            raise CloudFormatError(f"neighbour count {count} does not match {len(nb)} listed ids", no)
        if count < 3:
            raise CloudFormatError(f"stencil too small (n >= 3 required), point {pid} has {count}", no)
        for j in nb:
            if not 0 <= j < n:
                raise CloudFormatError(f"neighbor id {j} out of range", no)
            if j == pid:
                raise CloudFormatError(f"point {pid} lists itself as a neighbour", no)
        kind[expect] = k
        nbhs.append(nb)
    return PointCloud(x, y, kind, nx, ny, nbhs, layout=layout)


def format_point_cloud(cloud):
    out = io.StringIO()
    out.write(f"{cloud.n_points}\n")
    for i in range(cloud.n_points):
        nb = cloud.nbhs[i]
        out.write(
            f"{i} {cloud.x[i]:.17g} {cloud.y[i]:.17g} {int(cloud.kind[i])} "
            f"{cloud.nx[i]:.17g} {cloud.ny[i]:.17g} {len(nb)}"
        )
        for j in nb:
            out.write(f" {int(j)}")
        out.write("\n")
    return out.getvalue()


def write_point_cloud(cloud, path):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_point_cloud(cloud))


# -------------------------------------------------------------- generators

def generate_rect_cloud(nx, ny, bounds=(0.0, 1.0, 0.0, 1.0), jitter=0.0, seed=0, k=8,
                        layout="soa"):
    """Jittered ``nx`` x ``ny`` lattice with outer-boundary edges."""
    if nx < 4 or ny < 4:
        raise ValueError(f"nx and ny must be at least 4, got {nx}x{ny}")
    if not 0.0 <= jitter <= 0.3:
        raise ValueError(f"jitter must lie in [0, 0.3], got {jitter}")
    xmin, xmax, ymin, ymax = map(float, bounds)
    if not (xmax > xmin and ymax > ymin):
        raise ValueError(f"degenerate bounds {bounds}")
    hx = (xmax - xmin) / (nx - 1)
    hy = (ymax - ymin) / (ny - 1)
    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny))
    ii = ii.ravel()
    jj = jj.ravel()
    x = xmin + ii * hx
    y = ymin + jj * hy
    n = x.size
    rng = np.random.default_rng(seed)
    shift = rng.uniform(-1.0, 1.0, size=(2, n))
    # outward side normals; corners take the normalised sum
    sx = np.where(ii == 0, -1.0, np.where(ii == nx - 1, 1.0, 0.0))
    sy = np.where(jj == 0, -1.0, np.where(jj == ny - 1, 1.0, 0.0))
    boundary = (sx != 0) | (sy != 0)
    interior = ~boundary
    x = np.where(interior, x + jitter * hx * shift[0], x)
    y = np.where(interior, y + jitter * hy * shift[1], y)
    norm = np.hypot(sx, sy)
    norm[~boundary] = 1.0
    kind = np.where(boundary, PointKind.OUTER, PointKind.INTERIOR)
    cloud = PointCloud(x, y, kind, sx / norm, sy / norm, layout=layout)
    return build_stencils(cloud, k)


def generate_annulus_cloud(n_radial, n_theta, r_inner=1.0, r_outer=3.0, jitter=0.0, seed=0,
                           k=8, layout="soa"):
    """Polar cloud around a unit-circle wall with an outer far-field ring."""
    if n_radial < 3 or n_theta < 8:
        raise ValueError("annulus needs n_radial >= 3 and n_theta >= 8")
    if not 0.0 <= jitter <= 0.3:
        raise ValueError(f"jitter must lie in [0, 0.3], got {jitter}")
    if not r_outer > r_inner > 0:
        raise ValueError("need r_outer > r_inner > 0")
    # geometric radial spacing keeps cells roughly square
    ratio = (r_outer / r_inner) ** (1.0 / (n_radial - 1))
    radii = r_inner * ratio ** np.arange(n_radial)
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    rr, tt = np.meshgrid(radii, theta, indexing="ij")
    rr = rr.ravel()
    tt = tt.ravel()
    ring = np.repeat(np.arange(n_radial), n_theta)
    rng = np.random.default_rng(seed)
    shift = rng.uniform(-1.0, 1.0, size=(2, rr.size))
    inner = (ring > 0) & (ring < n_radial - 1)
    dr = rr * (ratio - 1.0)
    dt = 2.0 * np.pi / n_theta
    rr = np.where(inner, rr + jitter * dr * shift[0] * 0.5, rr)
    tt = np.where(inner, tt + jitter * dt * shift[1], tt)
    x = rr * np.cos(tt)
    y = rr * np.sin(tt)
    kind = np.full(rr.size, PointKind.INTERIOR, dtype=np.int8)
    kind[ring == 0] = PointKind.WALL
    kind[ring == n_radial - 1] = PointKind.OUTER
    nxv = np.zeros(rr.size)
    nyv = np.zeros(rr.size)
    # outward from the fluid: into the body at the wall, away from it at the far field
    nxv[ring == 0] = -np.cos(tt[ring == 0])
    nyv[ring == 0] = -np.sin(tt[ring == 0])
    nxv[ring == n_radial - 1] = np.cos(tt[ring == n_radial - 1])
    nyv[ring == n_radial - 1] = np.sin(tt[ring == n_radial - 1])
    cloud = PointCloud(x, y, kind, nxv, nyv, layout=layout)
    return build_stencils(cloud, k)


# ---------------------------------------------------------------- stencils

def build_stencils(cloud, k=8):
    """Connect each point to its ``k`` nearest distinct points.

    Ordering is by squared Euclidean distance, ties broken by smaller id.
    Connectivity is not symmetrised.
    """
    n = cloud.n_points
    if k < 3:
        raise ValueError(f"k must be at least 3, got {k}")
    if k >= n:
        raise ValueError(f"k={k} must be smaller than n_points={n}")
    pts = np.column_stack([cloud.x, cloud.y])
    tree = cKDTree(pts)
    nbhs = [None] * n
    todo = np.arange(n)
    extra = 4
    while todo.size:
        kq = min(n, k + 1 + extra)
        _, cand = tree.query(pts[todo], k=kq)
        cand = np.atleast_2d(cand)
        retry = []
        for row, p in enumerate(todo):
            c = cand[row]
            c = c[c < n]
            d2 = (cloud.x[c] - cloud.x[p]) ** 2 + (cloud.y[c] - cloud.y[p]) ** 2
            keep = d2 > 0.0
            c, d2 = c[keep], d2[keep]
            order = np.lexsort((c, d2))
            c, d2 = c[order], d2[order]
            # the k-th pick must be strictly closer than anything not queried
            if kq < n and (c.size <= k or not d2[k - 1] < d2[-1]):
                retry.append(p)
                continue
            if c.size < k:
                raise ValueError(f"point {p} has fewer than {k} distinct neighbours")
            nbhs[p] = c[:k].astype(np.int64)
        todo = np.asarray(retry, dtype=np.int64)
        extra *= 2
    cloud.nbhs = nbhs
    cloud._invalidate()
    return cloud


def split_stencils(cloud, p):
    """Sign-filtered neighbour subsets of point ``p``.

    A neighbour with zero offset along an axis joins both subsets of that axis.
    """
    nb = cloud.nbhs[p]
    dx, dy = cloud.deltas(p)
    return SplitStencils(
        xpos=[int(j) for j in nb[dx >= 0]],
        xneg=[int(j) for j in nb[dx <= 0]],
        ypos=[int(j) for j in nb[dy >= 0]],
        yneg=[int(j) for j in nb[dy <= 0]],
    )


def median_spacing(cloud):
    tree = cKDTree(np.column_stack([cloud.x, cloud.y]))
    d, _ = tree.query(np.column_stack([cloud.x, cloud.y]), k=2)
    return float(np.median(d[:, 1]))


@dataclass
class ValidationReport:
    full_size: np.ndarray
    split_size: np.ndarray      # (n, 4) in SPLIT_NAMES order
    det_full: np.ndarray
    det_split: np.ndarray       # (n, 4)
    det_tol: float
    defective: np.ndarray       # bool mask
    reasons: dict = field(default_factory=dict)

    @property
    def n_defective(self):
        return int(self.defective.sum())

    @property
    def ok(self):
        return self.n_defective == 0

    def summary(self):
        lines = [
            f"points: {self.full_size.size}",
            f"stencil size min/max: {self.full_size.min()}/{self.full_size.max()}",
            f"det_tol: {self.det_tol:.6g}",
            f"defective points: {self.n_defective}",
        ]
        for p in sorted(self.reasons)[:20]:
            lines.append(f"  point {p}: {self.reasons[p]}")
        return "\n".join(lines)


def uses_split_stencils(kind):
    return kind != PointKind.OUTER


def validate_cloud(cloud, det_tol=None):
    """Report stencil sizes and least-squares determinants per point."""
    n = cloud.n_points
    if det_tol is None:
        det_tol = 1e-12 * median_spacing(cloud) ** 4
    full_size = np.zeros(n, dtype=np.int64)
    split_size = np.zeros((n, 4), dtype=np.int64)
    det_full = np.zeros(n)
    det_split = np.zeros((n, 4))
    defective = np.zeros(n, dtype=bool)
    reasons = {}
    for p in range(n):
        nb = cloud.nbhs[p]
        dx, dy = cloud.deltas(p)
        full_size[p] = nb.size
        det_full[p] = _det(dx, dy)
        why = []
        if nb.size < 3:
            why.append("fewer than 3 neighbours")
        if not det_full[p] > det_tol:
            why.append(f"singular full stencil (det={det_full[p]:.3g})")
        masks = (dx >= 0, dx <= 0, dy >= 0, dy <= 0)
        for s, m in enumerate(masks):
            split_size[p, s] = int(m.sum())
            det_split[p, s] = _det(dx[m], dy[m])
        if uses_split_stencils(cloud.kind[p]):
            for s, name in enumerate(SPLIT_NAMES):
                if split_size[p, s] == 0:
                    why.append(f"empty {name} stencil")
                elif not det_split[p, s] > det_tol:
                    why.append(f"singular {name} stencil (det={det_split[p, s]:.3g})")
        if why:
            defective[p] = True
            reasons[p] = "; ".join(why)
    return ValidationReport(full_size, split_size, det_full, det_split, det_tol, defective, reasons)


def _det(dx, dy):
    sxx = syy = sxy = 0.0
    for a, b in zip(dx, dy):
        sxx += a * a
        syy += b * b
        sxy += a * b
    return sxx * syy - sxy * sxy


def wall_loop_order(cloud):
    """Wall point ids ordered by angle about their centroid, with arc positions."""
    wall = np.flatnonzero(cloud.kind == PointKind.WALL)
    if wall.size == 0:
        return wall, np.zeros(0)
    cx = cloud.x[wall].mean()
    cy = cloud.y[wall].mean()
    ang = np.arctan2(cloud.y[wall] - cy, cloud.x[wall] - cx)
    wall = wall[np.lexsort((wall, ang))]
    seg = np.hypot(np.diff(cloud.x[wall]), np.diff(cloud.y[wall]))
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    return wall, arc


def nearest_neighbour_distance(cloud, p):
    dx, dy = cloud.deltas(p)
    return math.sqrt(float(np.min(dx * dx + dy * dy)))
