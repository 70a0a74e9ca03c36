import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lskum.cloud import (
    PointCloud,
    PointKind,
    build_stencils,
    format_point_cloud,
    generate_annulus_cloud,
    generate_rect_cloud,
    median_spacing,
    read_point_cloud,
    split_stencils,
    validate_cloud,
    wall_loop_order,
    write_point_cloud,
)
from lskum.errors import CloudFormatError

FOUR_POINTS = """4
0 0 0 0 0 0 3 1 2 3
1 1 0 2 1 0 3 0 2 3
2 0 1 2 0 1 3 0 1 3
3 1 1 2 0.70710678118654757 0.70710678118654757 3 0 1 2
"""


# --------------------------------------------------------------------- I/O

def test_read_four_point_file():
    c = read_point_cloud(FOUR_POINTS)
    assert c.n_points == 4
    assert list(c.nbhs[0]) == [1, 2, 3]
    assert c.kind[1] == PointKind.OUTER
    rec = c.record(3)
    assert rec.nbhs == (0, 1, 2)
    assert rec.nx == pytest.approx(2 ** -0.5)


def test_read_from_bytes_stream_and_path(tmp_path):
    a = read_point_cloud(io.BytesIO(FOUR_POINTS.encode()))
    path = tmp_path / "g.dat"
    path.write_text(FOUR_POINTS)
    b = read_point_cloud(str(path))
    assert a.same_geometry(b)


def test_record_count_mismatch():
    text = FOUR_POINTS.replace("4\n", "2\n", 1)
    with pytest.raises(CloudFormatError, match="record count mismatch"):
        read_point_cloud(text)


def test_stencil_too_small_names_line():
    text = "4\n0 0 0 0 0 0 2 1 2\n" + "\n".join(FOUR_POINTS.splitlines()[2:]) + "\n"
    with pytest.raises(CloudFormatError, match=r"stencil too small \(n >= 3 required\)") as info:
        read_point_cloud(text)
    assert info.value.line == 2
    assert "line 2" in str(info.value)


@pytest.mark.parametrize("text,msg", [
    ("x\n", "malformed header"),
    ("2 3\n", "malformed header"),
    ("4\n0 0 0 0 0 0 3 1 2 9\n1 1 0 2 1 0 3 0 2 3\n2 0 1 2 0 1 3 0 1 3\n3 1 1 2 0 1 3 0 1 2\n",
     "out of range"),
    ("4\n0 0 0 0 0 0 3 1 2 0\n1 1 0 2 1 0 3 0 2 3\n2 0 1 2 0 1 3 0 1 3\n3 1 1 2 0 1 3 0 1 2\n",
     "itself"),
    ("4\n1 0 0 0 0 0 3 1 2 3\n1 1 0 2 1 0 3 0 2 3\n2 0 1 2 0 1 3 0 1 3\n3 1 1 2 0 1 3 0 1 2\n",
     "ascending"),
    ("4\n0 0 0 7 0 0 3 1 2 3\n1 1 0 2 1 0 3 0 2 3\n2 0 1 2 0 1 3 0 1 3\n3 1 1 2 0 1 3 0 1 2\n",
     "kind"),
    ("", "empty"),
])
def test_malformed_files(text, msg):
    with pytest.raises(CloudFormatError, match=msg):
        read_point_cloud(text + ("\n" if "\n" not in text else ""))


def test_write_read_round_trip(tmp_path):
    c = generate_rect_cloud(9, 7, jitter=0.2, seed=4)
    path = tmp_path / "c.dat"
    write_point_cloud(c, path)
    back = read_point_cloud(str(path))
    assert back.same_geometry(c)
    assert format_point_cloud(back) == format_point_cloud(c)


def test_annulus_round_trip_keeps_normals(tmp_path):
    c = generate_annulus_cloud(5, 24, jitter=0.1, seed=2)
    back = read_point_cloud(format_point_cloud(c))
    assert np.array_equal(back.nx, c.nx) and np.array_equal(back.ny, c.ny)


# -------------------------------------------------------------- generators

def test_rect_4x4_corner():
    c = generate_rect_cloud(4, 4, (0, 1, 0, 1), 0.0, 0)
    assert c.n_points == 16
    assert c.x[0] == 0.0 and c.y[0] == 0.0
    assert c.kind[0] == PointKind.OUTER
    assert c.nx[0] ** 2 + c.ny[0] ** 2 == pytest.approx(1.0, abs=1e-12)
    assert (c.nx[0], c.ny[0]) == pytest.approx((-2 ** -0.5, -2 ** -0.5))


def test_rect_is_bit_reproducible():
    a = format_point_cloud(generate_rect_cloud(10, 10, (0, 1, 0, 1), 0.1, 7))
    b = format_point_cloud(generate_rect_cloud(10, 10, (0, 1, 0, 1), 0.1, 7))
    assert a == b
    assert a != format_point_cloud(generate_rect_cloud(10, 10, (0, 1, 0, 1), 0.1, 8))


def test_rect_40x40_stencil_sizes():
    c = generate_rect_cloud(40, 40, jitter=0.1, seed=0)
    interior = np.flatnonzero(c.kind == PointKind.INTERIOR)
    assert all(len(c.nbhs[p]) >= 8 for p in interior)


def test_rect_boundary_normals_are_unit_and_outward():
    c = generate_rect_cloud(8, 6, (-1, 2, 0, 1), 0.2, 3)
    outer = c.kind == PointKind.OUTER
    assert np.allclose(c.nx[outer] ** 2 + c.ny[outer] ** 2, 1.0, atol=1e-12)
    cx, cy = 0.5, 0.5
    assert np.all((c.x[outer] - cx) * c.nx[outer] + (c.y[outer] - cy) * c.ny[outer] > 0)
    assert np.all(c.nx[~outer] == 0) and np.all(c.ny[~outer] == 0)


@pytest.mark.parametrize("args", [(3, 10), (10, 2)])
def test_rect_rejects_small(args):
    with pytest.raises(ValueError):
        generate_rect_cloud(*args)


def test_rect_rejects_jitter():
    with pytest.raises(ValueError):
        generate_rect_cloud(10, 10, jitter=0.5)


def test_annulus_wall_loop():
    c = generate_annulus_cloud(6, 32, jitter=0.1, seed=1)
    wall = np.flatnonzero(c.kind == PointKind.WALL)
    assert wall.size == 32
    # every wall point has at least two wall neighbours
    for p in wall:
        assert np.sum(c.kind[c.nbhs[p]] == PointKind.WALL) >= 2
    # wall normals point into the body (towards the origin)
    assert np.all(c.x[wall] * c.nx[wall] + c.y[wall] * c.ny[wall] < 0)
    ids, arc = wall_loop_order(c)
    assert sorted(ids) == sorted(wall)
    assert np.all(np.diff(arc) > 0)
    assert arc[-1] == pytest.approx(2 * np.pi * (1 - 1 / 32), rel=0.05)


# ---------------------------------------------------------------- stencils

def _cloud(x, y):
    n = len(x)
    return PointCloud(x, y, np.zeros(n), np.zeros(n), np.zeros(n))


def test_collinear_knn():
    c = build_stencils(_cloud([0.0, 1.0, 2.0, 3.5, 5.0], [0.0] * 5), 3)
    assert sorted(c.nbhs[2]) == [0, 1, 3]
    assert list(c.nbhs[2][:2]) == [1, 3]


def test_tie_prefers_smaller_id():
    c = build_stencils(_cloud([0.0, 1.0, -1.0, 0.0, 0.0, 5.0], [0.0, 0.0, 0.0, 1.0, -1.0, 5.0]), 3)
    assert list(c.nbhs[0]) == [1, 2, 3]


def test_knn_matches_brute_force():
    rng = np.random.default_rng(9)
    x, y = rng.uniform(0, 1, (2, 150))
    x[10], y[10] = x[3], y[3] + 1e-3      # near duplicates
    c = build_stencils(_cloud(x, y), 8)
    for p in range(c.n_points):
        d2 = (x - x[p]) ** 2 + (y - y[p]) ** 2
        ids = np.arange(c.n_points)
        keep = d2 > 0
        order = np.lexsort((ids[keep], d2[keep]))
        assert list(c.nbhs[p]) == list(ids[keep][order][:8])
        assert p not in c.nbhs[p]


def test_knn_rejects_bad_k():
    with pytest.raises(ValueError):
        build_stencils(_cloud([0, 1, 2, 3], [0, 1, 0, 1]), 4)
    with pytest.raises(ValueError):
        build_stencils(_cloud([0, 1, 2, 3], [0, 1, 0, 1]), 2)


def test_split_cross_tie_rule():
    c = PointCloud([0, 1, -1, 0, 0], [0, 0, 0, 1, -1], np.zeros(5), np.zeros(5), np.zeros(5),
                   nbhs=[[1, 2, 3, 4], [0, 3, 4], [0, 3, 4], [0, 1, 2], [0, 1, 2]])
    s = split_stencils(c, 0)
    assert s.xpos == [1, 3, 4]
    assert s.xneg == [2, 3, 4]
    assert s.ypos == [1, 2, 3]
    assert s.yneg == [1, 2, 4]


def test_split_one_sided_is_flagged():
    c = PointCloud([0, 1, 2, 1.5], [0, 0.1, -0.2, 0.5], np.zeros(4), np.zeros(4), np.zeros(4),
                   nbhs=[[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]])
    assert split_stencils(c, 0).xneg == []
    rep = validate_cloud(c)
    assert rep.defective[0]
    assert "xneg" in rep.reasons[0]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_split_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    x = np.round(rng.uniform(-1, 1, 21), 1)   # rounding produces ties
    y = np.round(rng.uniform(-1, 1, 21), 1)
    x[0] = y[0] = 0.0
    pts = {(a, b) for a, b in zip(x[1:], y[1:])}
    if (0.0, 0.0) in pts:
        return
    c = PointCloud(x, y, np.zeros(21), np.zeros(21), np.zeros(21),
                   nbhs=[list(range(1, 21))] + [[0, 1, 2]] * 20)
    s = split_stencils(c, 0)
    assert s.xpos == [j for j in range(1, 21) if x[j] >= 0]
    assert s.xneg == [j for j in range(1, 21) if x[j] <= 0]
    assert s.ypos == [j for j in range(1, 21) if y[j] >= 0]
    assert s.yneg == [j for j in range(1, 21) if y[j] <= 0]
    assert set(s.xpos) | set(s.xneg) == set(range(1, 21))
    assert not set(s.xpos) & set(s.xneg) & {j for j in range(1, 21) if x[j] != 0}


# -------------------------------------------------------------- validation

def test_validate_cross_determinant():
    h = 0.5
    c = PointCloud([0, h, -h, 0, 0], [0, 0, 0, h, -h], np.zeros(5), np.zeros(5), np.zeros(5),
                   nbhs=[[1, 2, 3, 4], [0, 3, 4], [0, 3, 4], [0, 1, 2], [0, 1, 2]])
    rep = validate_cloud(c)
    assert rep.det_full[0] == pytest.approx(4 * h ** 4)
    assert rep.full_size[0] == 4


def test_validate_collinear_defective():
    c = PointCloud([0, 1, 2, 3], [0, 0, 0, 0], np.zeros(4), np.zeros(4), np.zeros(4),
                   nbhs=[[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]])
    rep = validate_cloud(c)
    assert rep.det_full[0] == 0.0
    assert rep.defective.all()
    assert not rep.ok
    assert "singular" in rep.summary()


@pytest.mark.parametrize("jitter", [0.0, 0.1])
def test_validate_generated_clean(jitter):
    c = generate_rect_cloud(40, 40, jitter=jitter, seed=0)
    rep = validate_cloud(c)
    assert rep.n_defective == 0
    assert rep.det_tol == pytest.approx(1e-12 * median_spacing(c) ** 4)


def test_validate_annulus_clean():
    assert validate_cloud(generate_annulus_cloud(8, 48, jitter=0.1)).ok


def test_copy_and_layout_switch_keep_fields():
    c = generate_rect_cloud(6, 6)
    c.store.set("prim", None, np.arange(4 * 36, dtype=float).reshape(4, 36))
    d = c.copy(layout="aos")
    assert d.store.layout == "aos"
    assert np.array_equal(d.store.get("prim"), c.store.get("prim"))
    c.use_layout("aos")
    assert c.store.layout == "aos"
    assert np.array_equal(c.store.get("prim"), d.store.get("prim"))
