"""Region adjacency graph with incrementally maintained contact statistics.

Pixel ownership lives in one padded label array and each region's pixels are
threaded through a linked list, so merging splices two lists.  Per region the
graph keeps its contour length (pixels with an 8-neighbour outside the region,
map border included), how many of those touch another region, and per
neighbour how many of its pixels touch that neighbour.  A merge only changes
these numbers for pixels in the 8-neighbourhood of the absorbed region; they
are subtracted and re-added locally.

Ripple minima are logged as events (absorbed value, former neighbours) and
resolved through the merge forest when queried, which gives the same result
as rewriting every pair annotation eagerly on each merge.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
from numba import types
from numba.typed import Dict, List

from .map_io import LabelImage

OFFSETS = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
NO_RIPPLE = np.iinfo(np.int64).max


class GraphError(KeyError):
    """Missing region id or an operation on non-adjacent regions."""


@dataclass(frozen=True)
class Region:
    id: int
    value: int
    area: int
    contour_length: int


@dataclass(frozen=True)
class Edge:
    regions: tuple[int, int]
    values: tuple[int, int]
    contact_length: int
    ripple_min: int | None = None


# -- compiled kernels ------------------------------------------------------


@numba.njit(cache=True)
def _new_adjacency(n):
    adj = List()
    for _ in range(n):
        adj.append(Dict.empty(key_type=types.int64, value_type=types.int64))
    return adj


@numba.njit(cache=True)
def _accumulate(lab, offs, pixels, count, sign, contour, touch, adj):
    seen = np.empty(8, dtype=np.int64)
    for i in range(count):
        p = pixels[i]
        own = lab[p]
        if own <= 0:
            continue
        ns = 0
        edge = False
        for k in range(8):
            q = lab[p + offs[k]]
            if q == own:
                continue
            edge = True
            if q <= 0:
                continue
            dup = False
            for j in range(ns):
                if seen[j] == q:
                    dup = True
                    break
            if not dup:
                seen[ns] = q
                ns += 1
        if edge:
            contour[own] += sign
        if ns:
            touch[own] += sign
            row = adj[own]
            for j in range(ns):
                v = row.get(seen[j], 0) + sign
                if v == 0:
                    row.pop(seen[j])
                else:
                    row[seen[j]] = v


@numba.njit(cache=True)
def _build(lab, offs, n_labels):
    """Linked pixel lists, areas, contour/touch counts and adjacency from a padded label array."""
    head = np.full(n_labels, -1, dtype=np.int64)
    tail = np.full(n_labels, -1, dtype=np.int64)
    nxt = np.full(lab.size, -1, dtype=np.int64)
    area = np.zeros(n_labels, dtype=np.int64)
    pixels = np.empty(lab.size, dtype=np.int64)
    n = 0
    for p in range(lab.size):
        l = lab[p]
        if l > 0:
            if head[l] < 0:
                head[l] = p
            else:
                nxt[tail[l]] = p
            tail[l] = p
            area[l] += 1
            pixels[n] = p
            n += 1
    contour = np.zeros(n_labels, dtype=np.int64)
    touch = np.zeros(n_labels, dtype=np.int64)
    adj = _new_adjacency(n_labels)
    _accumulate(lab, offs, pixels, n, 1, contour, touch, adj)
    return head, tail, nxt, area, contour, touch, adj


@numba.njit(cache=True)
def _region_pixels(head, nxt, area, rid):
    out = np.empty(area[rid], dtype=np.int64)
    p = head[rid]
    i = 0
    while p >= 0:
        out[i] = p
        i += 1
        p = nxt[p]
    return out


@numba.njit(cache=True)
def _merge(lab, offs, nxt, head, tail, area, alive, parent, contour, touch, adj,
           mark, stamp, keep, gone):
    stamp[0] += 1
    s = stamp[0]
    around = np.empty(area[gone] * 9, dtype=np.int64)
    n = 0
    p = head[gone]
    while p >= 0:
        if mark[p] != s:
            mark[p] = s
            around[n] = p
            n += 1
        for k in range(8):
            q = p + offs[k]
            if mark[q] != s:
                mark[q] = s
                around[n] = q
                n += 1
        p = nxt[p]
    _accumulate(lab, offs, around, n, -1, contour, touch, adj)
    p = head[gone]
    while p >= 0:
        lab[p] = keep
        p = nxt[p]
    _accumulate(lab, offs, around, n, 1, contour, touch, adj)
    nxt[tail[keep]] = head[gone]
    tail[keep] = tail[gone]
    head[gone] = -1
    tail[gone] = -1
    area[keep] += area[gone]
    area[gone] = 0
    alive[gone] = False
    parent[gone] = keep


@numba.njit(cache=True)
def _ripple_host(rid, threshold, value, area, contour, adj):
    if contour[rid] == 0:
        return -1
    best = -1
    best_dv = 0
    best_area = 0
    for n, c in adj[rid].items():
        if c / contour[rid] > threshold:
            dv = abs(value[n] - value[rid])
            if (best < 0 or dv < best_dv or (dv == best_dv and area[n] > best_area)
                    or (dv == best_dv and area[n] == best_area and n < best)):
                best, best_dv, best_area = n, dv, area[n]
    return best


@numba.njit(cache=True)
def _ripple_pass(order, threshold, lab, offs, nxt, head, tail, value, area, alive, parent,
                 contour, touch, adj, mark, stamp, ev_vals, ev_ptr, ev_nbs):
    merges = 0
    queue = np.empty(1024, dtype=np.int64)
    for rid in order:
        if not alive[rid]:
            continue
        qs = 0
        qe = 1
        queue[0] = rid
        while qs < qe:
            cur = queue[qs]
            qs += 1
            if not alive[cur]:
                continue
            host = _ripple_host(cur, threshold, value, area, contour, adj)
            if host < 0:
                continue
            k = len(adj[cur])
            former = np.empty(k, dtype=np.int64)
            i = 0
            for n in adj[cur].keys():
                former[i] = n
                i += 1
            ev_vals.append(value[cur])
            for i in range(k):
                ev_nbs.append(former[i])
            ev_ptr.append(len(ev_nbs))
            _merge(lab, offs, nxt, head, tail, area, alive, parent, contour, touch, adj,
                   mark, stamp, host, cur)
            merges += 1
            # re-check the ripple's other neighbours, highest value first
            keys = np.empty(k, dtype=np.int64)
            m = 0
            for i in range(k):
                n = former[i]
                if n != host:
                    keys[m] = ((2**30 - value[n]) << 32) | n
                    m += 1
            keys = np.sort(keys[:m])
            if qe + m > queue.size:
                # compact consumed entries, then grow if still short
                queue[:qe - qs] = queue[qs:qe]
                qe -= qs
                qs = 0
                if qe + m > queue.size:
                    bigger = np.empty(2 * (qe + m), dtype=np.int64)
                    bigger[:qe] = queue[:qe]
                    queue = bigger
            for i in range(m):
                queue[qe] = keys[i] & 0xFFFFFFFF
                qe += 1
    return merges


@numba.njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nx = parent[x]
        parent[x] = root
        x = nx
    return root


@numba.njit(cache=True)
def _resolve_ripples(parent, old_a, old_b, old_v, ev_vals, ev_ptr, ev_nbs):
    """Map stored pairs and pending events onto current regions; min per pair."""
    cap = old_a.size
    start = 0
    for e in range(len(ev_vals)):
        k = ev_ptr[e] - start
        cap += k * (k - 1) // 2
        start = ev_ptr[e]
    keys = np.empty(cap, dtype=np.int64)
    vals = np.empty(cap, dtype=np.int64)
    m = 0
    for i in range(old_a.size):
        a = _find(parent, old_a[i])
        b = _find(parent, old_b[i])
        if a != b:
            keys[m] = (min(a, b) << 32) | max(a, b)
            vals[m] = old_v[i]
            m += 1
    start = 0
    for e in range(len(ev_vals)):
        stop = ev_ptr[e]
        for i in range(start, stop):
            a = _find(parent, ev_nbs[i])
            for j in range(i + 1, stop):
                b = _find(parent, ev_nbs[j])
                if a != b:
                    keys[m] = (min(a, b) << 32) | max(a, b)
                    vals[m] = ev_vals[e]
                    m += 1
        start = stop
    keys = keys[:m]
    vals = vals[:m]
    order = np.argsort(keys, kind="mergesort")
    out_a = np.empty(m, dtype=np.int64)
    out_b = np.empty(m, dtype=np.int64)
    out_v = np.empty(m, dtype=np.int64)
    n = 0
    i = 0
    while i < m:
        k = keys[order[i]]
        best = vals[order[i]]
        i += 1
        while i < m and keys[order[i]] == k:
            best = min(best, vals[order[i]])
            i += 1
        out_a[n] = k >> 32
        out_b[n] = k & 0xFFFFFFFF
        out_v[n] = best
        n += 1
    return out_a[:n], out_b[:n], out_v[:n]


@numba.njit(cache=True)
def _row(adj, rid):
    """Neighbour ids and contact counts of one region, sorted by id."""
    d = adj[rid]
    ids = np.empty(len(d), dtype=np.int64)
    counts = np.empty(len(d), dtype=np.int64)
    i = 0
    for k, v in d.items():
        ids[i] = k
        counts[i] = v
        i += 1
    order = np.argsort(ids)
    return ids[order], counts[order]


@numba.njit(cache=True)
def _count(adj, a, b):
    return adj[a].get(b, 0)


def _int_list():
    return List.empty_list(types.int64)


# -- graph -----------------------------------------------------------------


class RegionGraph:
    """Regions of a label image plus their adjacency.

    ``labels`` (a view without padding) is the authoritative pixel ownership;
    0 marks pixels outside every region.  Region ids are the labels the
    graph was built from and never change; a merge retires the absorbed id.
    """

    def __init__(self, labels: np.ndarray, values):
        labels = np.asarray(labels, dtype=np.int32)
        h, w = labels.shape
        self._lab = np.zeros((h + 2, w + 2), dtype=np.int32)
        self._lab[1:-1, 1:-1] = labels
        n = int(labels.max()) + 1 if labels.size else 1
        width = w + 2
        self._offs = np.array([dy * width + dx for dy, dx in OFFSETS], dtype=np.int64)
        flat = self._lab.ravel()
        (self._head, self._tail, self._nxt, self._area,
         self._contour, self._touch, self._adj) = _build(flat, self._offs, n)
        self._alive = self._area > 0
        self._value = np.zeros(n, dtype=np.int64)
        for rid in np.flatnonzero(self._alive).tolist():
            v = int(values[rid])
            if v < 1:
                raise ValueError(f"region {rid} has value {v} < 1")
            self._value[rid] = v
        self._parent = np.arange(n, dtype=np.int64)
        self._mark = np.zeros(flat.size, dtype=np.int64)
        self._stamp = np.zeros(1, dtype=np.int64)
        self._rip_a = np.zeros(0, dtype=np.int64)
        self._rip_b = np.zeros(0, dtype=np.int64)
        self._rip_v = np.zeros(0, dtype=np.int64)
        self._ev_vals, self._ev_ptr, self._ev_nbs = _int_list(), _int_list(), _int_list()
        self._ripple_cache: dict[tuple[int, int], int] | None = {}

    @classmethod
    def from_labels(cls, labels: np.ndarray, values) -> "RegionGraph":
        """``values`` maps label -> region value (dict or indexable array)."""
        return cls(labels, values)

    def _get(self, rid) -> int:
        rid = int(rid)
        if not 0 < rid < self._alive.size or not self._alive[rid]:
            raise GraphError(f"no region with id {rid}")
        return rid

    # -- queries -----------------------------------------------------------

    @property
    def labels(self) -> np.ndarray:
        return self._lab[1:-1, 1:-1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    def __len__(self) -> int:
        return int(self._alive.sum())

    def __contains__(self, rid) -> bool:
        return 0 < rid < self._alive.size and bool(self._alive[rid])

    def ids(self) -> list[int]:
        return np.flatnonzero(self._alive).tolist()

    @property
    def regions(self) -> dict[int, Region]:
        return {r: self.region(r) for r in self.ids()}

    def region(self, rid: int) -> Region:
        rid = self._get(rid)
        return Region(rid, int(self._value[rid]), int(self._area[rid]), int(self._contour[rid]))

    def value(self, rid: int) -> int:
        return int(self._value[self._get(rid)])

    def area(self, rid: int) -> int:
        return int(self._area[self._get(rid)])

    def contour_length(self, rid: int) -> int:
        return int(self._contour[self._get(rid)])

    def contacts(self, rid: int) -> dict[int, int]:
        """Neighbour id -> number of rid's pixels touching that neighbour."""
        ids, counts = _row(self._adj, self._get(rid))
        return dict(zip(ids.tolist(), counts.tolist()))

    def neighbors(self, rid: int) -> list[int]:
        return _row(self._adj, self._get(rid))[0].tolist()

    def adjacent(self, a: int, b: int) -> bool:
        return a in self and b in self and _count(self._adj, a, b) > 0

    def contact_length(self, a: int, b: int) -> int:
        """Contour pixels of either region touching the other."""
        a, b = self._get(a), self._get(b)
        return int(_count(self._adj, a, b) + _count(self._adj, b, a))

    def contact_fraction(self, a: int, b: int) -> float:
        """Share of a's contour pixels that touch region b."""
        a, b = self._get(a), self._get(b)
        total = self._contour[a]
        return float(_count(self._adj, a, b) / total) if total else 0.0

    def wall_contact_fraction(self, a: int) -> float:
        """Share of a's contour pixels touching any other region (not obstacles or border)."""
        a = self._get(a)
        total = self._contour[a]
        return float(self._touch[a] / total) if total else 0.0

    def _ripples(self) -> dict[tuple[int, int], int]:
        if self._ripple_cache is None:
            a, b, v = _resolve_ripples(self._parent, self._rip_a, self._rip_b, self._rip_v,
                                       self._ev_vals, self._ev_ptr, self._ev_nbs)
            self._rip_a, self._rip_b, self._rip_v = a, b, v
            self._ev_vals, self._ev_ptr, self._ev_nbs = _int_list(), _int_list(), _int_list()
            self._ripple_cache = dict(zip(zip(a.tolist(), b.tolist()), v.tolist()))
        return self._ripple_cache

    def ripple_min(self, a: int, b: int) -> int | None:
        """Smallest value among ripples absorbed between (what became) a and b."""
        return self._ripples().get((min(a, b), max(a, b)))

    def edge(self, a: int, b: int) -> Edge:
        if not self.adjacent(a, b):
            raise GraphError(f"regions {a} and {b} are not adjacent")
        lo, hi = min(a, b), max(a, b)
        return Edge((lo, hi), (self.value(lo), self.value(hi)),
                    self.contact_length(lo, hi), self.ripple_min(lo, hi))

    def edges(self) -> list[Edge]:
        return [self.edge(a, b) for a in self.ids() for b in self.neighbors(a) if a < b]

    def _flat_pixels(self, rid: int) -> np.ndarray:
        return _region_pixels(self._head, self._nxt, self._area, rid)

    def pixels(self, rid: int) -> tuple[np.ndarray, np.ndarray]:
        """(rows, cols) of the region's pixels in map coordinates."""
        r, c = np.divmod(self._flat_pixels(self._get(rid)), self._lab.shape[1])
        return r - 1, c - 1

    def contour(self, rid: int) -> list[tuple[int, int]]:
        """Boundary pixels of the region in raster order."""
        rid = self._get(rid)
        flat = np.sort(self._flat_pixels(rid))
        lab = self._lab.ravel()
        on_edge = np.zeros(flat.size, dtype=bool)
        for off in self._offs:
            on_edge |= lab[flat + off] != rid
        r, c = np.divmod(flat[on_edge], self._lab.shape[1])
        return list(zip((r - 1).tolist(), (c - 1).tolist()))

    # -- mutation ----------------------------------------------------------

    def _log_ripple(self, value: int, former) -> None:
        self._ev_vals.append(value)
        for n in former:
            self._ev_nbs.append(n)
        self._ev_ptr.append(len(self._ev_nbs))

    def merge(self, survivor: int, absorbed: int, record_ripple_min: bool = False) -> int:
        """Fold ``absorbed`` into ``survivor``; the survivor keeps its value.

        With ``record_ripple_min`` the absorbed value is folded into the
        ripple minimum of every pair among the absorbed region's former
        neighbours.  Pair annotations involving the absorbed region move to
        the survivor.
        """
        survivor, absorbed = self._get(survivor), self._get(absorbed)
        if survivor == absorbed or not self.adjacent(survivor, absorbed):
            raise GraphError(f"cannot merge non-adjacent regions {survivor} and {absorbed}")
        if record_ripple_min:
            self._log_ripple(int(self._value[absorbed]), _row(self._adj, absorbed)[0].tolist())
        _merge(self._lab.ravel(), self._offs, self._nxt, self._head, self._tail, self._area,
               self._alive, self._parent, self._contour, self._touch, self._adj,
               self._mark, self._stamp, survivor, absorbed)
        self._ripple_cache = None
        return survivor

    def ripple_pass(self, order, threshold: float) -> int:
        """Compiled ripple sweep over ``order``; see merging.remove_ripples."""
        order = np.asarray(order, dtype=np.int64)
        merges = _ripple_pass(order, float(threshold), self._lab.ravel(), self._offs, self._nxt,
                              self._head, self._tail, self._value, self._area, self._alive,
                              self._parent, self._contour, self._touch, self._adj, self._mark,
                              self._stamp, self._ev_vals, self._ev_ptr, self._ev_nbs)
        if merges:
            self._ripple_cache = None
        return merges

    # -- export ------------------------------------------------------------

    def to_label_image(self) -> LabelImage:
        """Labels renumbered densely 1..K in order of first appearance in raster scan."""
        lab = self.labels
        ids, first = np.unique(lab.ravel(), return_index=True)
        keep = ids > 0
        ids, first = ids[keep], first[keep]
        order = ids[np.argsort(first)]
        lut = np.zeros(int(lab.max()) + 1 if lab.size else 1, dtype=np.int32)
        lut[order] = np.arange(1, order.size + 1, dtype=np.int32)
        return LabelImage(lut[lab])

    def describe(self) -> str:
        """Text adjacency listing: id, value, area, then neighbours with contact fractions."""
        lines = []
        for rid in self.ids():
            nbs = " ".join(
                f"{n}:{self.contact_fraction(rid, n):.3f}" for n in self.neighbors(rid)
            )
            lines.append(f"{rid} value={self.value(rid)} area={self.area(rid)} neighbors=[{nbs}]")
        return "\n".join(lines)
