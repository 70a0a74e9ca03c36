"""Per-point field storage with interchangeable AOS and SOA backends.

Both backends expose ``table``: a ``(N_COMPONENTS, n_points)`` view indexed
``[component, point]``.  For SOA it is C-contiguous, so one component of all
points is contiguous; for AOS it is the transpose of an ``(n_points,
N_COMPONENTS)`` record block, so all components of one point are contiguous.
Compiled kernels index ``table`` directly and therefore see each layout's
real memory access pattern, while the arithmetic stays identical.
"""
from __future__ import annotations

import numpy as np

# field name -> number of components; order fixes record offsets
FIELDS = {
    "prim": 4,
    "q": 4,
    "qx": 4,
    "qy": 4,
    "flux_res": 4,
    "delta_t": 1,
}
OFFSETS = {}
_off = 0
for _f, _nc in FIELDS.items():
    OFFSETS[_f] = _off
    _off += _nc
N_COMPONENTS = _off
LAYOUTS = ("aos", "soa")

# row offsets used by the compiled kernels
PRIM, Q, QX, QY, FLUX_RES, DELTA_T = (OFFSETS[f] for f in FIELDS)


def _check_field(field):
    if field not in FIELDS:
        raise KeyError(f"unknown field {field!r}; expected one of {list(FIELDS)}")


class FieldStore:
    layout = None

    def __init__(self, n_points):
        if n_points <= 0:
            raise ValueError(f"n_points must be positive, got {n_points}")
        self.n_points = int(n_points)
        self.table = None

    def _rows(self, field):
        _check_field(field)
        off = OFFSETS[field]
        return self.table[off:off + FIELDS[field]]

    def get(self, field, idx=None):
        """Return a fresh C-contiguous ``(ncomp, m)`` copy of ``field`` at ``idx``."""
        rows = self._rows(field)
        if idx is None:
            return np.array(rows, order="C")
        return np.ascontiguousarray(rows[:, np.asarray(idx, dtype=np.int64)])

    def set(self, field, idx, values):
        rows = self._rows(field)
        values = np.asarray(values, dtype=np.float64).reshape(FIELDS[field], -1)
        if idx is None:
            rows[:, :] = values
        else:
            rows[:, np.asarray(idx, dtype=np.int64)] = values

    def get_component(self, field, comp, idx=None):
        return self.get(field, idx)[comp]

    def to_array(self):
        """All fields as an ``(N_COMPONENTS, n_points)`` array in canonical order."""
        return np.array(self.table, order="C")

    def load_array(self, arr):
        arr = np.asarray(arr, dtype=np.float64)
        if arr.shape != (N_COMPONENTS, self.n_points):
            raise ValueError(f"expected shape {(N_COMPONENTS, self.n_points)}, got {arr.shape}")
        self.table[:, :] = arr

    def copy_from(self, other):
        if other.n_points != self.n_points:
            raise ValueError("capacity mismatch")
        self.load_array(other.table)

    def __repr__(self):
        return f"{type(self).__name__}(n_points={self.n_points})"


class AosStore(FieldStore):
    """One interleaved record of every field component per point."""

    layout = "aos"

    def __init__(self, n_points):
        super().__init__(n_points)
        self.data = np.zeros((self.n_points, N_COMPONENTS))
        self.table = self.data.T
        dtype = np.dtype([(f, np.float64, (nc,)) for f, nc in FIELDS.items()])
        # named per-record access to the same bytes
        self.records = self.data.view(dtype).reshape(self.n_points)

    @property
    def record_stride(self):
        return self.data.strides[0]


class SoaStore(FieldStore):
    """A separate contiguous array per field component."""

    layout = "soa"

    def __init__(self, n_points):
        super().__init__(n_points)
        self.data = np.zeros((N_COMPONENTS, self.n_points))
        self.table = self.data

    @property
    def arrays(self):
        return {f: list(self._rows(f)) for f in FIELDS}


def store_create(layout, n_points):
    if layout == "aos":
        return AosStore(n_points)
    if layout == "soa":
        return SoaStore(n_points)
    raise ValueError(f"layout must be one of {LAYOUTS}, got {layout!r}")


def store_equivalence_check(a, b):
    """True iff every (point, field, component) matches bit for bit."""
    if a.n_points != b.n_points:
        raise ValueError(f"capacity mismatch: {a.n_points} vs {b.n_points}")
    return bool(np.array_equal(a.to_array().view(np.uint64), b.to_array().view(np.uint64)))
