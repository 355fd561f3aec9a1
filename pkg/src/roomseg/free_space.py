"""Distance image, free space image (FSI) and the initial equal-value regions.

The FSI paints, for every free pixel ``p`` with rounded obstacle distance
``r``, the filled lattice disk ``{q : |q - p|^2 <= r^2}`` with value ``r`` and
keeps the pointwise maximum.  A pixel's FSI value is therefore the radius of
the largest such disk covering it, a proxy for the size of the place it
belongs to.
"""
from __future__ import annotations

import math

import numba
import numpy as np
from scipy import ndimage
from skimage.measure import label as cc_label

from .map_io import GridMap

__all__ = [
    "distance_transform",
    "disk_radii",
    "compute_fsi",
    "compute_fsi_naive",
    "group_regions",
]


def distance_transform(grid: GridMap) -> np.ndarray:
    """Exact Euclidean distance from each pixel to the nearest occupied pixel.

    The image border acts as an obstacle ring just outside the map, so a free
    pixel in column 0 is at distance 1 from it.
    """
    padded = np.pad(grid.free, 1, constant_values=False)
    if not padded.any():
        return np.zeros(grid.shape, dtype=np.float64)
    dist = ndimage.distance_transform_edt(padded)
    return dist[1:-1, 1:-1]


def disk_radii(dist: np.ndarray) -> np.ndarray:
    """Round-half-up of the distance image to integer disk radii."""
    return np.floor(np.asarray(dist, dtype=np.float64) + 0.5).astype(np.int32)


@numba.njit(cache=True)
def _isqrt(v):
    s = int(math.sqrt(v))
    while s * s > v:
        s -= 1
    while (s + 1) * (s + 1) <= v:
        s += 1
    return s


@numba.njit(cache=True)
def _fsi_kernel(radii):
    h, w = radii.shape
    out = np.zeros((h, w), dtype=np.int32)
    rmax = 0
    for y in range(h):
        for x in range(w):
            if radii[y, x] > rmax:
                rmax = radii[y, x]
    # half-width of each row of the lattice disk, per radius
    spans = np.zeros((rmax + 1, rmax + 1), dtype=np.int32)
    for r in range(rmax + 1):
        for dy in range(r + 1):
            spans[r, dy] = _isqrt(r * r - dy * dy)
    for y in range(h):
        for x in range(w):
            r = radii[y, x]
            if r <= 0:
                continue
            # skip disks contained in a neighbour's disk of radius >= r + |offset|
            dominated = False
            for dy in range(-2, 3):
                yy = y + dy
                if yy < 0 or yy >= h:
                    continue
                for dx in range(-2, 3):
                    xx = x + dx
                    if xx < 0 or xx >= w or (dx == 0 and dy == 0):
                        continue
                    need = r + math.sqrt(dx * dx + dy * dy)
                    if radii[yy, xx] >= need:
                        dominated = True
                        break
                if dominated:
                    break
            if dominated:
                continue
            y0 = max(0, y - r)
            y1 = min(h - 1, y + r)
            for yy in range(y0, y1 + 1):
                half = spans[r, abs(yy - y)]
                x0 = max(0, x - half)
                x1 = min(w - 1, x + half)
                row = out[yy]
                for xx in range(x0, x1 + 1):
                    if row[xx] < r:
                        row[xx] = r
    return out


def compute_fsi(dist: np.ndarray, free: np.ndarray | None = None) -> np.ndarray:
    """Free space image from a distance image.

    Disks centred on pixels of radius 0 paint nothing.  Cells where ``dist`` is
    zero (occupied) are forced to 0 since a rounded-up radius can reach them;
    pass ``free`` to use an explicit free mask instead.
    """
    radii = disk_radii(dist)
    out = _fsi_kernel(np.ascontiguousarray(radii))
    mask = (np.asarray(dist) > 0) if free is None else np.asarray(free, dtype=bool)
    out[~mask] = 0
    return out


def compute_fsi_naive(dist: np.ndarray, free: np.ndarray | None = None) -> np.ndarray:
    """Reference FSI: paint every pixel's disk in turn, no skipping."""
    radii = disk_radii(dist)
    h, w = radii.shape
    out = np.zeros((h, w), dtype=np.int32)
    cache: dict[int, np.ndarray] = {}
    for y, x in zip(*np.nonzero(radii > 0)):
        r = int(radii[y, x])
        disk = cache.get(r)
        if disk is None:
            oy, ox = np.mgrid[-r:r + 1, -r:r + 1]
            disk = cache[r] = (oy * oy + ox * ox) <= r * r
        y0, y1 = max(0, y - r), min(h, y + r + 1)
        x0, x1 = max(0, x - r), min(w, x + r + 1)
        sub = disk[y0 - y + r:y1 - y + r, x0 - x + r:x1 - x + r]
        win = out[y0:y1, x0:x1]
        win[sub] = np.maximum(win[sub], r)
    mask = (np.asarray(dist) > 0) if free is None else np.asarray(free, dtype=bool)
    out[~mask] = 0
    return out


def group_regions(fsi: np.ndarray):
    """8-connected components of equal nonzero FSI value, as a RegionGraph."""
    from .region_graph import RegionGraph

    fsi = np.asarray(fsi)
    labels = cc_label(fsi, background=0, connectivity=2).astype(np.int32)
    n = int(labels.max())
    values = np.zeros(n + 1, dtype=np.int64)
    if n:
        # every pixel of a component has the same value; any representative works
        flat_l = labels.ravel()
        values[flat_l] = fsi.ravel()
    return RegionGraph.from_labels(labels, values)
