"""End-to-end segmentation and parameter sweeps."""
from __future__ import annotations

import logging
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import evaluation
from .free_space import compute_fsi, distance_transform, group_regions
from .map_io import GridMap, LabelImage
from .merging import Params, merge_similar, remove_ripples, remove_wall_artifacts
from .refine import straighten_boundaries

log = logging.getLogger(__name__)


@dataclass
class Stages:
    """Intermediate results of one segmentation run (all label images are copies)."""

    distance: np.ndarray
    fsi: np.ndarray
    initial: LabelImage
    ripples: LabelImage
    merged: LabelImage
    walls: LabelImage
    final: LabelImage
    region_counts: dict = field(default_factory=dict)
    graph_listing: str = ""


def _snapshot(graph) -> LabelImage:
    return LabelImage(graph.labels.copy())


def run_stages(grid: GridMap, params: Params | None = None) -> Stages:
    p = params or Params()
    dist = distance_transform(grid)
    fsi = compute_fsi(dist, grid.free)
    graph = group_regions(fsi)
    counts = {"initial": len(graph)}
    initial = _snapshot(graph)
    remove_ripples(graph, p)
    counts["ripples"] = len(graph)
    ripples = _snapshot(graph)
    merge_similar(graph, p)
    counts["merged"] = len(graph)
    merged = _snapshot(graph)
    remove_wall_artifacts(graph, p)
    counts["walls"] = len(graph)
    walls = graph.to_label_image()
    final = straighten_boundaries(walls) if p.mode == "robot" else walls
    counts["final"] = final.n_regions
    log.debug("region counts %s", counts)
    return Stages(dist, fsi, initial, ripples, merged, walls, final, counts, graph.describe())


def _downscale(grid: GridMap, factor: int) -> GridMap:
    h, w = grid.shape
    hh, ww = -(-h // factor), -(-w // factor)
    padded = np.zeros((hh * factor, ww * factor), dtype=bool)
    padded[:h, :w] = grid.free
    # a coarse cell is free only when its whole block is free
    return GridMap(padded.reshape(hh, factor, ww, factor).all(axis=(1, 3)))


def _upscale(coarse: LabelImage, grid: GridMap, factor: int) -> LabelImage:
    h, w = grid.shape
    lab = np.repeat(np.repeat(coarse.labels, factor, axis=0), factor, axis=1)[:h, :w].copy()
    lab[~grid.free] = 0
    missing = grid.free & (lab == 0)
    if missing.any() and lab.any():
        _, (iy, ix) = ndimage.distance_transform_edt(lab == 0, return_indices=True)
        lab[missing] = lab[iy[missing], ix[missing]]
    return LabelImage(lab)


def segment(grid: GridMap, params: Params | None = None, downscale: int = 1) -> LabelImage:
    """Segment a map into regions; labels are dense 1..K, 0 on obstacles."""
    if downscale < 1:
        raise ValueError("downscale must be a positive integer")
    if downscale == 1:
        return run_stages(grid, params).final
    coarse = run_stages(_downscale(grid, downscale), params).final
    return _upscale(coarse, grid, downscale)


# -- sweeps ----------------------------------------------------------------

SWEEPABLE = ("ripple_threshold", "t_merging", "m", "d_threshold")


def _score(job):
    grid, gt, params = job
    return evaluation.evaluate(segment(grid, params), gt).mcc


def sweep(dataset, parameter: str, values, base: Params | None = None, jobs: int = 1) -> list[dict]:
    """Median MCC over ``dataset`` for each value of one parameter, others fixed.

    ``dataset`` is an iterable of (GridMap, LabelImage) pairs or a mapping of
    name -> pair.
    """
    if parameter not in SWEEPABLE:
        raise ValueError(f"parameter must be one of {SWEEPABLE}")
    items = list(dataset.values()) if isinstance(dataset, dict) else list(dataset)
    if not items:
        raise ValueError("empty dataset")
    base = base or Params()
    rows = []
    for v in values:
        p = base.with_value(parameter, v)
        work = [(g, gt, p) for g, gt in items]
        if jobs > 1:
            with ProcessPoolExecutor(jobs) as pool:
                scores = list(pool.map(_score, work))
        else:
            scores = [_score(w) for w in work]
        rows.append({"parameter": parameter, "value": v,
                     "median_mcc": statistics.median(scores), "mccs": scores})
    return rows
