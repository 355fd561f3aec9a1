import logging

import numpy as np
import pytest
from scipy import ndimage

from roomseg import synthetic
from roomseg.free_space import compute_fsi, distance_transform, group_regions
from roomseg.map_io import GridMap
from roomseg.merging import (
    Params,
    is_door,
    merge_similar,
    remove_ripples,
    remove_ripples_reference,
    remove_wall_artifacts,
    ripple_host,
    should_merge,
    similar,
    similar_with_margin,
)
from roomseg.region_graph import Edge, RegionGraph

P = Params()


def graph_of(labels, values):
    return RegionGraph.from_labels(np.array(labels), values)


def row_of(widths, values, height=5):
    """Regions side by side, left to right."""
    lab = np.zeros((height, sum(widths)), dtype=int)
    x = 0
    for i, w in enumerate(widths):
        lab[:, x:x + w] = i + 1
        x += w
    return graph_of(lab, {i + 1: v for i, v in enumerate(values)})


# -- params ----------------------------------------------------------------


def test_defaults():
    assert (P.ripple_threshold, P.t_merging, P.m, P.d_threshold) == (0.4, 0.3, 0.1, 0.4)
    assert Params(mode="sketch").d_threshold == 1.0
    assert Params(mode="sketch", d_threshold=0.5).d_threshold == 0.5


@pytest.mark.parametrize("kwargs", [
    {"t_merging": 1.5}, {"m": -0.1}, {"ripple_threshold": 2}, {"d_threshold": 1.01},
    {"t_merging": 0.95, "m": 0.1}, {"mode": "lidar"},
])
def test_invalid_params(kwargs):
    with pytest.raises(ValueError):
        Params(**kwargs)


# -- inequalities ----------------------------------------------------------


def test_similar_examples():
    assert similar(10, 8, 0.3)
    assert not similar(10, 6, 0.3) and similar_with_margin(10, 6, 0.3, 0.1)
    assert not similar_with_margin(10, 5, 0.3, 0.1)


def test_similar_implies_margin_and_scaling():
    for t in (0.2, 0.3, 0.5):
        for m in (0.0, 0.1):
            for v1 in range(1, 31):
                for v2 in range(1, 31):
                    if similar(v1, v2, t):
                        assert similar_with_margin(v1, v2, t, m)
                    for k in (2, 3, 7):
                        assert similar(v1, v2, t) == similar(k * v1, k * v2, t)
                        assert similar_with_margin(v1, v2, t, m) == similar_with_margin(k * v1, k * v2, t, m)


def test_is_door_examples():
    assert is_door(Edge((1, 2), (10, 9), 4, ripple_min=2), P)
    assert not is_door(Edge((1, 2), (10, 9), 4, ripple_min=9), P)
    assert not is_door(Edge((1, 2), (10, 9), 4), P)


# -- ripples ---------------------------------------------------------------


def _room_and_band(room_cols):
    lab = np.zeros((12, 12), dtype=int)
    lab[0:10, 0:room_cols] = 1
    lab[10, 0:10] = 2
    return graph_of(lab, {1: 10, 2: 2})


def test_band_with_sixty_percent_contact_is_absorbed():
    g = _room_and_band(5)
    assert g.contact_fraction(2, 1) == pytest.approx(0.6)
    assert remove_ripples(g, P) == 1
    assert g.ids() == [1] and g.area(1) == 60


def test_thirty_percent_contact_untouched():
    g = _room_and_band(2)
    assert g.contact_fraction(2, 1) == pytest.approx(0.3)
    assert remove_ripples(g, P) == 0 and len(g) == 2


def test_ripple_goes_to_closest_value():
    g = row_of([4, 1, 4], [10, 6, 7])
    assert remove_ripples(g, P) == 1
    assert g.ids() == [1, 3] and g.area(3) == 25
    assert g.ripple_min(1, 3) == 6


def test_host_tie_breaks_to_larger_area():
    g = row_of([4, 1, 6], [8, 6, 4])
    assert ripple_host(g, 2, P) == 3


def test_two_ripples_beside_one_room_end_in_the_room():
    lab = np.zeros((10, 12), dtype=int)
    lab[:, 0:10] = 1
    lab[:, 10] = 2
    lab[:, 11] = 3
    g = graph_of(lab, {1: 10, 2: 3, 3: 2})
    remove_ripples(g, P)
    assert len(g) == 1 and g.area(g.ids()[0]) == 120


@pytest.mark.parametrize("seed", range(12))
def test_compiled_pass_matches_reference(seed):
    rng = np.random.default_rng(seed)
    free = ndimage.binary_opening(rng.random((40, 50)) > rng.uniform(0.15, 0.4))
    fsi = compute_fsi(distance_transform(GridMap(free)), free)
    thr = float(rng.choice([0.3, 0.4, 0.45]))
    a, b = group_regions(fsi), group_regions(fsi)
    p = Params(ripple_threshold=thr)
    assert remove_ripples(a, p) == remove_ripples_reference(b, p)
    assert np.array_equal(a.labels, b.labels)
    assert a.edges() == b.edges()


def test_compiled_pass_matches_reference_on_suite():
    for grid, _ in synthetic.suite().values():
        fsi = compute_fsi(distance_transform(grid), grid.free)
        a, b = group_regions(fsi), group_regions(fsi)
        remove_ripples(a, P)
        remove_ripples_reference(b, P)
        assert np.array_equal(a.labels, b.labels) and a.edges() == b.edges()


def test_no_region_remains_a_ripple():
    rng = np.random.default_rng(9)
    free = ndimage.binary_opening(rng.random((60, 60)) > 0.3)
    g = group_regions(compute_fsi(distance_transform(GridMap(free)), free))
    remove_ripples(g, P)
    assert all(ripple_host(g, r, P) is None for r in g.ids())


# -- similar values --------------------------------------------------------


def test_close_values_merge():
    g = row_of([5, 4], [10, 8])
    assert merge_similar(g, P) == 1 and g.ids() == [1] and g.value(1) == 10


def test_margin_needs_a_similar_neighbour():
    alone = row_of([6, 4], [10, 6])
    assert not should_merge(alone, 1, 2, P)
    assert merge_similar(alone, P) == 0

    helped = row_of([6, 4, 3], [10, 6, 13])
    assert not similar(6, 13, 0.3) and not similar_with_margin(6, 13, 0.3, 0.1)
    assert should_merge(helped, 1, 2, P)
    merge_similar(helped, P)
    assert helped.ids() == [1] and helped.value(1) == 10


def test_far_values_never_merge():
    g = row_of([6, 4, 3], [10, 5, 10])
    assert not should_merge(g, 1, 2, P)
    assert merge_similar(g, P) == 0


def test_door_blocks_merge():
    g = row_of([4, 1, 4], [10, 2, 9])
    g.merge(1, 2, record_ripple_min=True)
    assert is_door(g.edge(1, 3), P)
    assert merge_similar(g, P) == 0 and len(g) == 2

    g = row_of([4, 1, 4], [10, 9, 9])
    g.merge(1, 2, record_ripple_min=True)
    assert merge_similar(g, P) == 1


def test_larger_region_survives():
    g = row_of([3, 7], [8, 10])
    merge_similar(g, P)
    assert g.ids() == [2] and g.value(2) == 10


def test_merge_decisions_monotone_in_m():
    for grid, _ in synthetic.suite().values():
        g = group_regions(compute_fsi(distance_transform(grid), grid.free))
        remove_ripples(g, P)
        for e in g.edges():
            a, b = e.regions
            if should_merge(g, a, b, Params(m=0.0)):
                assert should_merge(g, a, b, Params(m=0.1))
                assert should_merge(g, a, b, Params(m=0.2))


# -- thick walls -----------------------------------------------------------


def _door_gap():
    lab = np.zeros((10, 23), dtype=int)
    lab[:, 0:10] = 1
    lab[4:6, 10:13] = 2
    lab[:, 13:21] = 3
    return graph_of(lab, {1: 5, 2: 1, 3: 5})


def test_door_gap_region_is_fused():
    g = _door_gap()
    assert g.wall_contact_fraction(2) > 0.4
    assert remove_wall_artifacts(g, P) == 1
    assert g.ids() == [1, 3] and g.area(1) == 106


def test_sketch_threshold_is_noop():
    g = _door_gap()
    assert remove_wall_artifacts(g, Params(mode="sketch")) == 0 and len(g) == 3


def test_exact_threshold_untouched():
    lab = np.zeros((30, 12), dtype=int)
    lab[1, 1:11] = 1
    lab[2:28, 1:4] = 2
    g = graph_of(lab, {1: 1, 2: 5})
    assert g.wall_contact_fraction(1) == pytest.approx(0.4)
    assert remove_wall_artifacts(g, P) == 0 and len(g) == 2


def test_no_eligible_neighbour_is_logged(caplog):
    g = row_of([1, 1, 1], [1, 1, 1])
    with caplog.at_level(logging.INFO, logger="roomseg.merging"):
        assert remove_wall_artifacts(g, P) == 0
    assert len(g) == 3
    assert "no eligible neighbour" in caplog.text


@pytest.mark.parametrize("name", list(synthetic.suite()))
def test_passes_never_add_regions(name):
    grid, _ = synthetic.suite()[name]
    g = group_regions(compute_fsi(distance_transform(grid), grid.free))
    counts = [len(g)]
    for step in (remove_ripples, merge_similar, remove_wall_artifacts):
        step(g, P)
        counts.append(len(g))
    assert counts == sorted(counts, reverse=True)
