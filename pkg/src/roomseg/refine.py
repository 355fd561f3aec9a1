"""Boundary straightening for metric (robot) maps.

Every maximal chain of boundary pixels between two regions is replaced by the
straight segment joining its two ends, where an end is a cluster of chain
pixels touching an obstacle, the map border or a third region.
"""
from __future__ import annotations

import numpy as np
from scipy import ndimage

from .map_io import LabelImage

_EIGHT = np.ones((3, 3), dtype=bool)


def adjacent_pairs(labels: np.ndarray) -> list[tuple[int, int]]:
    """Sorted (a, b), a < b, of labels touching under 8-connectivity."""
    lab = np.pad(np.asarray(labels), 1)
    core = lab[1:-1, 1:-1]
    found = set()
    h, w = core.shape
    for dy, dx in ((0, 1), (1, -1), (1, 0), (1, 1)):
        other = lab[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
        m = (core != other) & (core > 0) & (other > 0)
        if m.any():
            a, b = core[m], other[m]
            lo, hi = np.minimum(a, b), np.maximum(a, b)
            found.update(zip(lo.tolist(), hi.tolist()))
    return sorted(found)


def _end_groups(chain: np.ndarray, lab: np.ndarray, a: int, b: int) -> list[np.ndarray]:
    """Centroids of the clusters of chain pixels touching anything but a or b."""
    foreign = (lab != a) & (lab != b)
    touching = chain & ndimage.binary_dilation(foreign, _EIGHT)
    groups, n = ndimage.label(touching, _EIGHT)
    if n < 2:
        return []
    return [np.array(c) for c in ndimage.center_of_mass(touching, groups, range(1, n + 1))]


def _window(lab, ys, xs, margin):
    h, w = lab.shape
    y0, y1 = max(0, int(ys.min()) - margin), min(h, int(ys.max()) + margin + 1)
    x0, x1 = max(0, int(xs.min()) - margin), min(w, int(xs.max()) + margin + 1)
    return y0, y1, x0, x1


def _straighten_chain(lab, cys, cxs, a, b, cent_a, cent_b):
    """Straighten one chain given by its pixel coordinates; returns the touched box or None."""
    y0, y1, x0, x1 = _window(lab, cys, cxs, 2)
    chain = np.zeros((y1 - y0, x1 - x0), dtype=bool)
    chain[cys - y0, cxs - x0] = True
    ends = _end_groups(chain, lab[y0:y1, x0:x1], a, b)
    if len(ends) < 2:
        return None
    best = None
    for i in range(len(ends)):
        for j in range(i + 1, len(ends)):
            d = float(np.hypot(*(ends[j] - ends[i])))
            if best is None or d > best[0] + 1e-12:
                best = (d, i, j)
    length, i, j = best
    if length < 1.0:
        return None
    e1 = ends[i] + (y0, x0)
    e2 = ends[j] + (y0, x0)
    u = (e2 - e1) / length

    band = np.abs((cxs - e1[1]) * u[0] - (cys - e1[0]) * u[1]).max() + 1.0
    # the zone lies within the chain's box widened by the band
    y0, y1, x0, x1 = _window(lab, cys, cxs, int(np.ceil(band)) + 2)
    win = lab[y0:y1, x0:x1]
    ys, xs = np.nonzero((win == a) | (win == b))
    dy, dx = ys + y0 - e1[0], xs + x0 - e1[1]
    along = dy * u[0] + dx * u[1]
    perp = dx * u[0] - dy * u[1]
    zone = (along >= -0.5) & (along <= length + 0.5) & (np.abs(perp) <= band)
    if not zone.any():
        return None
    ys, xs, perp = ys[zone], xs[zone], perp[zone]
    cur = win[ys, xs]
    side = np.sign(np.round(perp, 9))
    score = side[cur == a].sum() - side[cur == b].sum()
    a_side = 1.0 if score >= 0 else -1.0
    new = np.where(side == a_side, a, b)
    on_line = side == 0
    if on_line.any():
        pts = np.stack([ys[on_line] + y0, xs[on_line] + x0], axis=1)
        da = np.hypot(*(pts - cent_a).T)
        db = np.hypot(*(pts - cent_b).T)
        new[on_line] = np.where(da <= db, a, b)
    win[ys, xs] = new
    return (slice(int(ys.min()) + y0, int(ys.max()) + y0 + 1),
            slice(int(xs.min()) + x0, int(xs.max()) + x0 + 1))


def _union(b1, b2):
    return tuple(slice(min(p.start, q.start), max(p.stop, q.stop)) for p, q in zip(b1, b2))


def straighten_boundaries(seg: LabelImage) -> LabelImage:
    """Replace each boundary chain between two regions by a straight segment.

    Pixels only change hands between the two regions sharing the boundary,
    so every region keeps its pixels' total and obstacles stay unlabeled.
    Closed boundaries (one region inside another) and chains without two
    distinct ends are left as they are.
    """
    lab = np.pad(seg.labels.astype(np.int32), 1)
    h, w = lab.shape
    ids = np.unique(lab)
    ids = ids[ids > 0]
    centroids = {}
    if ids.size:
        for rid, c in zip(ids.tolist(), ndimage.center_of_mass(np.ones_like(lab), lab, ids)):
            centroids[rid] = np.array(c)
    boxes = ndimage.find_objects(lab)
    for a, b in adjacent_pairs(seg.labels):
        ba, bb = boxes[a - 1], boxes[b - 1]
        # the shared boundary lies where the two boxes, grown by one, overlap
        y0 = max(0, max(ba[0].start, bb[0].start) - 1)
        y1 = min(h, min(ba[0].stop, bb[0].stop) + 1)
        x0 = max(0, max(ba[1].start, bb[1].start) - 1)
        x1 = min(w, min(ba[1].stop, bb[1].stop) + 1)
        if y0 >= y1 or x0 >= x1:
            continue
        crop = lab[y0:y1, x0:x1]
        in_a, in_b = crop == a, crop == b
        boundary = (in_a & ndimage.binary_dilation(in_b, _EIGHT)) | (
            in_b & ndimage.binary_dilation(in_a, _EIGHT)
        )
        if not boundary.any():
            continue
        chains, n = ndimage.label(boundary, _EIGHT)
        cys, cxs = np.nonzero(chains)
        kk = chains[cys, cxs]
        order = np.argsort(kk, kind="stable")
        cys, cxs, kk = cys[order] + y0, cxs[order] + x0, kk[order]
        cuts = np.searchsorted(kk, np.arange(1, n + 2))
        for k in range(n):
            sl = slice(cuts[k], cuts[k + 1])
            touched = _straighten_chain(lab, cys[sl], cxs[sl], a, b, centroids[a], centroids[b])
            if touched is not None:
                boxes[a - 1] = _union(boxes[a - 1], touched)
                boxes[b - 1] = _union(boxes[b - 1], touched)
    return LabelImage(lab[1:-1, 1:-1])
