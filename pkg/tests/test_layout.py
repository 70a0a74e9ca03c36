import numpy as np
import pytest

from lskum.layout import (
    FIELDS,
    N_COMPONENTS,
    OFFSETS,
    AosStore,
    SoaStore,
    store_create,
    store_equivalence_check,
)


@pytest.mark.parametrize("layout", ["aos", "soa"])
def test_zero_init(layout):
    s = store_create(layout, 10)
    assert s.get("prim", [3])[0, 0] == 0.0
    assert s.layout == layout
    assert not s.to_array().any()


def test_store_create_rejects_bad_args():
    with pytest.raises(ValueError):
        store_create("aosoa", 4)
    with pytest.raises(ValueError):
        store_create("soa", 0)
    with pytest.raises(KeyError):
        store_create("soa", 4).get("rho")


def test_field_offsets_are_fixed():
    assert list(FIELDS) == ["prim", "q", "qx", "qy", "flux_res", "delta_t"]
    assert N_COMPONENTS == 21
    assert OFFSETS["qy"] == OFFSETS["qx"] + 4


def test_aos_memory_is_interleaved():
    s = AosStore(5)
    assert s.data.shape == (5, N_COMPONENTS)
    assert s.data.flags.c_contiguous
    assert s.record_stride == N_COMPONENTS * 8
    s.set("qx", [2], [1.0, 2.0, 3.0, 4.0])
    assert list(s.data[2, OFFSETS["qx"]:OFFSETS["qx"] + 4]) == [1, 2, 3, 4]
    assert list(s.records["qx"][2]) == [1, 2, 3, 4]


def test_soa_memory_is_per_component():
    s = SoaStore(5)
    assert s.data.shape == (N_COMPONENTS, 5)
    s.set("prim", None, np.arange(20.0).reshape(4, 5))
    arrs = s.arrays["prim"]
    assert len(arrs) == 4 and all(a.shape == (5,) and a.flags.c_contiguous for a in arrs)
    assert list(arrs[1]) == [5, 6, 7, 8, 9]


def test_random_cross_layout_writes():
    rng = np.random.default_rng(0)
    n = 50
    a, b = store_create("aos", n), store_create("soa", n)
    names = list(FIELDS)
    for _ in range(1000):
        f = names[rng.integers(len(names))]
        p = int(rng.integers(n))
        v = rng.normal(size=FIELDS[f])
        a.set(f, [p], v)
        b.set(f, [p], v)
        assert np.array_equal(a.get(f, [p]), b.get(f, [p]))
    for f in names:
        assert np.array_equal(a.get(f), b.get(f))
    assert store_equivalence_check(a, b)


def test_last_write_wins():
    s = store_create("aos", 3)
    s.set("delta_t", [1], [1.0])
    s.set("delta_t", [1], [2.0])
    assert s.get_component("delta_t", 0, [1])[0] == 2.0


def test_equivalence_fresh_pair():
    assert store_equivalence_check(store_create("aos", 7), store_create("soa", 7))


def test_equivalence_detects_single_bit():
    a, b = store_create("aos", 7), store_create("soa", 7)
    a.set("q", None, np.full((4, 7), 0.3))
    b.copy_from(a)
    assert store_equivalence_check(a, b)
    bits = b.data.view(np.uint64)
    bits[OFFSETS["q"] + 2, 5] ^= np.uint64(1)
    assert not store_equivalence_check(a, b)


def test_equivalence_distinguishes_signed_zero():
    a, b = store_create("soa", 2), store_create("soa", 2)
    b.set("prim", [0], [-0.0, 0, 0, 0])
    assert not store_equivalence_check(a, b)


def test_equivalence_capacity_mismatch():
    with pytest.raises(ValueError, match="capacity"):
        store_equivalence_check(store_create("aos", 3), store_create("aos", 4))


def test_load_array_checks_shape():
    s = store_create("soa", 3)
    with pytest.raises(ValueError):
        s.load_array(np.zeros((N_COMPONENTS, 4)))


@pytest.mark.parametrize("layout", ["aos", "soa"])
def test_get_returns_copy(layout):
    s = store_create(layout, 3)
    v = s.get("prim")
    v[:] = 1.0
    assert not s.get("prim").any()
