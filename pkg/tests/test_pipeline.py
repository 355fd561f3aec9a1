import numpy as np
import pytest
from scipy import ndimage

from roomseg import synthetic
from roomseg.evaluation import evaluate
from roomseg.map_io import GridMap
from roomseg.merging import Params
from roomseg.pipeline import run_stages, segment, sweep


def test_two_rooms_with_door():
    grid, gt = synthetic.two_rooms_with_door()
    seg = segment(grid)
    assert seg.n_regions == 2
    assert evaluate(seg, gt).mcc >= 0.95


def test_room_with_corridor():
    grid, gt = synthetic.room_with_corridor()
    assert segment(grid).n_regions == 2


def test_all_free():
    grid, _ = synthetic.all_free()
    assert segment(grid).n_regions == 1


@pytest.mark.parametrize("door", [3, 4])
@pytest.mark.parametrize("room", [15, 21])
def test_door_variants(door, room):
    grid, gt = synthetic.two_rooms_with_door(room=room, door=door)
    seg = segment(grid)
    assert seg.n_regions == 2 and evaluate(seg, gt).mcc >= 0.95


def test_office_rooms_found():
    grid, gt = synthetic.office()
    seg = segment(grid)
    assert seg.n_regions == 4 and evaluate(seg, gt).mcc >= 0.95


@pytest.mark.parametrize("name", list(synthetic.suite()))
def test_deterministic(name):
    grid, _ = synthetic.suite()[name]
    first = segment(grid)
    for _ in range(2):
        assert np.array_equal(segment(grid).labels, first.labels)


@pytest.mark.parametrize("seed", range(5))
def test_labels_cover_exactly_the_free_space(seed):
    rng = np.random.default_rng(seed)
    free = ndimage.binary_opening(rng.random((50, 60)) > 0.3)
    grid = GridMap(free)
    seg = segment(grid)
    seg.check_against(grid)
    assert np.array_equal(seg.labels > 0, free)
    assert seg.region_ids() == list(range(1, seg.n_regions + 1))


def test_stage_counts_never_increase():
    grid, _ = synthetic.office()
    st = run_stages(grid, Params())
    counts = [st.region_counts[k] for k in ("initial", "ripples", "merged", "walls", "final")]
    assert counts == sorted(counts, reverse=True)
    free = int(grid.free.sum())
    for img in (st.initial, st.ripples, st.merged, st.walls, st.final):
        assert int((img.labels > 0).sum()) == free
    assert st.graph_listing


def test_sketch_mode_skips_straightening():
    grid, _ = synthetic.l_corridor()
    st = run_stages(grid, Params(mode="sketch"))
    assert np.array_equal(st.final.labels, st.walls.labels)


def test_downscale():
    grid, gt = synthetic.floor_plan(400, 400, cell=80, corridor=12, door=10)
    seg = segment(grid, downscale=2)
    seg.check_against(grid)
    assert np.array_equal(seg.labels > 0, grid.free)
    assert evaluate(seg, gt).mcc > 0.9
    with pytest.raises(ValueError):
        segment(grid, downscale=0)


def test_sweep_single_map_matches_evaluate():
    grid, gt = synthetic.two_rooms_with_door()
    rows = sweep([(grid, gt)], "t_merging", [0.3])
    assert len(rows) == 1
    assert rows[0]["median_mcc"] == evaluate(segment(grid), gt).mcc


def test_sweep_validates():
    with pytest.raises(ValueError):
        sweep([], "t_merging", [0.3])
    with pytest.raises(ValueError):
        sweep(synthetic.suite(), "mode", ["robot"])


def test_sweep_parallel_matches_serial():
    data = synthetic.suite()
    serial = sweep(data, "ripple_threshold", [0.3, 0.45])
    parallel = sweep(data, "ripple_threshold", [0.3, 0.45], jobs=2)
    assert serial == parallel


def test_floor_plan_segments_well():
    grid, gt = synthetic.floor_plan(600, 600, cell=100, corridor=16, door=12)
    seg = segment(grid)
    assert evaluate(seg, gt).mcc > 0.95
