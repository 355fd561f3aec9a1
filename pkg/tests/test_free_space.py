import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import ndimage

from roomseg.free_space import (
    compute_fsi,
    compute_fsi_naive,
    disk_radii,
    distance_transform,
    group_regions,
)
from roomseg.map_io import GridMap

from oracles import edt_brute, fsi_brute


def random_free(rng, h, w, p=0.3):
    return ndimage.binary_opening(rng.random((h, w)) > p)


# -- distance transform ----------------------------------------------------


def test_center_of_ring_is_one():
    free = np.zeros((3, 3), dtype=bool)
    free[1, 1] = True
    assert distance_transform(GridMap(free))[1, 1] == 1.0


def test_three_four_five():
    free = np.ones((60, 60), dtype=bool)
    free[20, 20] = False
    assert distance_transform(GridMap(free))[23, 24] == pytest.approx(5.0, abs=1e-12)


def test_all_occupied_distance_is_zero():
    assert not distance_transform(GridMap(np.zeros((5, 7), dtype=bool))).any()


def test_border_acts_as_obstacle():
    d = distance_transform(GridMap(np.ones((9, 9), dtype=bool)))
    assert d[0, 4] == 1.0 and d[4, 4] == 5.0


@pytest.mark.parametrize("seed", range(8))
def test_edt_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    free = random_free(rng, 17, 23)
    assert np.allclose(distance_transform(GridMap(free)), edt_brute(free), atol=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_edt_zero_on_occupied_and_lipschitz(seed):
    rng = np.random.default_rng(seed)
    free = random_free(rng, 20, 20)
    d = distance_transform(GridMap(free))
    assert not d[~free].any()
    assert (d[free] >= 1).all()
    ys, xs = np.mgrid[0:20, 0:20]
    pts = np.stack([ys.ravel(), xs.ravel()], 1)
    sample = rng.choice(len(pts), 80, replace=False)
    for i in sample:
        gap = np.hypot(*(pts - pts[i]).T)
        assert (np.abs(d.ravel() - d.ravel()[i]) <= gap + 1e-9).all()


# -- free space image ------------------------------------------------------


def test_disk_radii_round_half_up():
    assert disk_radii(np.array([0.0, 0.49, 0.5, 1.5, 2.4999, 2.5])).tolist() == [0, 0, 1, 2, 2, 3]


def test_free_disk_of_radius_six():
    yy, xx = np.mgrid[0:31, 0:31]
    free = (yy - 15) ** 2 + (xx - 15) ** 2 <= 36
    d = distance_transform(GridMap(free))
    assert disk_radii(d)[15, 15] == 6
    fsi = compute_fsi(d, free)
    assert (fsi[free] == 6).all() and not fsi[~free].any()


def test_single_free_pixel():
    free = np.zeros((5, 5), dtype=bool)
    free[2, 2] = True
    fsi = compute_fsi(distance_transform(GridMap(free)), free)
    assert fsi[2, 2] == 1 and fsi.sum() == 1


def test_all_occupied_fsi_is_zero():
    free = np.zeros((6, 6), dtype=bool)
    assert not compute_fsi(distance_transform(GridMap(free)), free).any()


@pytest.mark.parametrize("seed", range(10))
def test_fsi_matches_full_image_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    free = random_free(rng, int(rng.integers(5, 30)), int(rng.integers(5, 30)), p=rng.uniform(0.1, 0.5))
    d = distance_transform(GridMap(free))
    expected = fsi_brute(d, free)
    assert np.array_equal(compute_fsi(d, free), expected)
    assert np.array_equal(compute_fsi_naive(d, free), expected)


def test_fsi_default_mask_uses_distance():
    rng = np.random.default_rng(5)
    free = random_free(rng, 25, 25)
    d = distance_transform(GridMap(free))
    assert np.array_equal(compute_fsi(d), compute_fsi(d, free))


@pytest.mark.parametrize("seed", range(4))
def test_fsi_covers_own_radius(seed):
    rng = np.random.default_rng(seed)
    free = random_free(rng, 30, 30)
    d = distance_transform(GridMap(free))
    fsi = compute_fsi(d, free)
    assert (fsi[free] >= disk_radii(d)[free]).all()
    assert (fsi[free] >= 1).all()


@settings(max_examples=40, deadline=None)
@given(arrays(bool, st.tuples(st.integers(4, 24), st.integers(4, 24))), st.data())
def test_fsi_monotone_under_added_obstacles(free, data):
    d = distance_transform(GridMap(free))
    before = compute_fsi(d, free)
    extra = data.draw(arrays(bool, free.shape))
    fewer = free & ~extra
    after = compute_fsi(distance_transform(GridMap(fewer)), fewer)
    assert (after <= before).all()


@pytest.mark.parametrize("seed", range(3))
def test_fsi_independent_of_paint_order(seed):
    rng = np.random.default_rng(seed)
    free = random_free(rng, 20, 20)
    d = distance_transform(GridMap(free))
    r = disk_radii(d)
    yy, xx = np.mgrid[0:20, 0:20]
    centers = list(zip(*np.nonzero(r > 0)))
    out = np.zeros((20, 20), dtype=int)
    for k in rng.permutation(len(centers)):
        y, x = centers[k]
        disk = (yy - y) ** 2 + (xx - x) ** 2 <= r[y, x] ** 2
        out[disk] = np.maximum(out[disk], r[y, x])
    out[~free] = 0
    assert np.array_equal(out, compute_fsi(d, free))


# -- initial regions -------------------------------------------------------


def test_uniform_blob_is_one_region():
    fsi = np.zeros((8, 8), dtype=np.int32)
    fsi[1:6, 2:7] = 6
    g = group_regions(fsi)
    assert len(g) == 1 and g.value(g.ids()[0]) == 6 and g.area(g.ids()[0]) == 25


def test_separated_blobs_have_no_edge():
    fsi = np.zeros((6, 12), dtype=np.int32)
    fsi[1:4, 1:4] = 6
    fsi[1:4, 7:10] = 6
    g = group_regions(fsi)
    assert len(g) == 2 and g.edges() == []


def test_diagonal_touch_connects():
    fsi = np.zeros((4, 4), dtype=np.int32)
    fsi[0, 0] = fsi[1, 1] = 3
    assert len(group_regions(fsi)) == 1


def test_corridor_abutting_room():
    free = np.zeros((13, 30), dtype=bool)
    free[2:11, 2:11] = True  # 9x9 room
    free[5:8, 11:28] = True  # width-3 corridor
    fsi = compute_fsi(distance_transform(GridMap(free)), free)
    g = group_regions(fsi)
    assert len(g) >= 2
    far = g.labels[6, 25]
    assert g.value(far) == 2
    room = g.labels[6, 6]
    assert g.value(room) > g.value(far)
    # some corridor-valued region touches a larger-valued region
    assert any(
        g.value(a) == 2 and g.value(b) > 2 or g.value(b) == 2 and g.value(a) > 2
        for e in g.edges() for a, b in [e.regions]
    )


@pytest.mark.parametrize("seed", range(4))
def test_regions_partition_nonzero_pixels(seed):
    rng = np.random.default_rng(seed)
    free = random_free(rng, 30, 30)
    fsi = compute_fsi(distance_transform(GridMap(free)), free)
    g = group_regions(fsi)
    assert np.array_equal(g.labels > 0, fsi > 0)
    assert sum(g.area(r) for r in g.ids()) == int((fsi > 0).sum())
    for r in g.ids():
        ys, xs = g.pixels(r)
        assert (fsi[ys, xs] == g.value(r)).all()
        _, n = ndimage.label(g.labels == r, np.ones((3, 3)))
        assert n == 1


def test_empty_map_gives_empty_graph():
    g = group_regions(np.zeros((4, 4), dtype=np.int32))
    assert len(g) == 0 and g.edges() == []
