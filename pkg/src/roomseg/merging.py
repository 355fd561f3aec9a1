"""The three merge passes: ripple removal, similar-value merging with door
detection, and removal of regions created by thick walls."""
from __future__ import annotations

import heapq
import logging
from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from .region_graph import Edge, RegionGraph

log = logging.getLogger(__name__)

MODES = ("robot", "sketch")
# guards float artefacts such as 10 * (0.3 + 0.1) = 4.000000000000001
_EPS = 1e-9


@dataclass(frozen=True)
class Params:
    ripple_threshold: float = 0.40
    t_merging: float = 0.30
    m: float = 0.10
    d_threshold: float | None = None
    mode: str = "robot"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.d_threshold is None:
            object.__setattr__(self, "d_threshold", 0.40 if self.mode == "robot" else 1.00)
        for name in ("ripple_threshold", "t_merging", "m", "d_threshold"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be within [0, 1], got {v}")
        if self.t_merging + self.m > 1.0 + _EPS:
            raise ValueError("t_merging + m must not exceed 1")

    @classmethod
    def for_mode(cls, mode: str, **overrides) -> "Params":
        return cls(mode=mode, **overrides)

    def with_value(self, name: str, value) -> "Params":
        return replace(self, **{name: value})


def similar(v1: float, v2: float, t_merging: float) -> bool:
    """|v1 - v2| <= max(v1, v2) * t_merging."""
    return abs(v1 - v2) <= max(v1, v2) * t_merging + _EPS


def similar_with_margin(v1: float, v2: float, t_merging: float, m: float) -> bool:
    """|v1 - v2| <= max(v1, v2) * (t_merging + m)."""
    return abs(v1 - v2) <= max(v1, v2) * (t_merging + m) + _EPS


def is_door(edge: Edge, p: Params) -> bool:
    """A recorded ripple minimum that differs significantly from either side marks a door."""
    if edge.ripple_min is None:
        return False
    va, vb = edge.values
    return not (similar(edge.ripple_min, va, p.t_merging) and similar(edge.ripple_min, vb, p.t_merging))


# -- ripples ---------------------------------------------------------------


def ripple_host(graph: RegionGraph, rid: int, p: Params) -> int | None:
    """Neighbour the region is a ripple of, or None.

    Among several qualifying neighbours the closest value wins, then the
    larger area, then the lower id.
    """
    contour = graph.contour_length(rid)
    if contour == 0:
        return None
    value = graph.value(rid)
    best = None
    for n, touching in graph.contacts(rid).items():
        if touching / contour > p.ripple_threshold:
            key = (abs(graph.value(n) - value), -graph.area(n), n)
            if best is None or key < best:
                best = key
    return None if best is None else best[2]


def remove_ripples(graph: RegionGraph, p: Params) -> int:
    """Merge ripples into their host, highest value first; returns the merge count.

    After each merge the absorbed ripple's other neighbours are re-examined
    (FIFO): only their contact with the grown host changed, so they are the
    only regions that can have become ripples.  Repeats until a whole pass
    merges nothing.
    """
    merges = 0
    while True:
        ids = np.array(graph.ids(), dtype=np.int64)
        values = np.array([graph.value(r) for r in ids.tolist()], dtype=np.int64)
        areas = np.array([graph.area(r) for r in ids.tolist()], dtype=np.int64)
        order = ids[np.lexsort((ids, -areas, -values))]
        merged = graph.ripple_pass(order, p.ripple_threshold)
        merges += merged
        if not merged:
            return merges


def remove_ripples_reference(graph: RegionGraph, p: Params) -> int:
    """Same pass as :func:`remove_ripples`, step by step in Python."""
    merges = 0
    while True:
        order = sorted(graph.ids(), key=lambda r: (-graph.value(r), -graph.area(r), r))
        merged_this_pass = 0
        for rid in order:
            if rid not in graph:
                continue
            queue = deque([rid])
            while queue:
                cur = queue.popleft()
                if cur not in graph:
                    continue
                host = ripple_host(graph, cur, p)
                if host is None:
                    continue
                former = [n for n in graph.neighbors(cur) if n != host]
                graph.merge(host, cur, record_ripple_min=True)
                merged_this_pass += 1
                former.sort(key=lambda r: (-graph.value(r), r))
                queue.extend(former)
        merges += merged_this_pass
        if not merged_this_pass:
            return merges


# -- similar values --------------------------------------------------------


def _similar_to_a_neighbour(graph: RegionGraph, a: int, b: int, t: float) -> bool:
    """One region is similar to some other neighbour of the other region."""
    va, vb = graph.value(a), graph.value(b)
    for n in graph.neighbors(b):
        if n != a and similar(va, graph.value(n), t):
            return True
    for n in graph.neighbors(a):
        if n != b and similar(vb, graph.value(n), t):
            return True
    return False


def should_merge(graph: RegionGraph, a: int, b: int, p: Params) -> bool:
    if is_door(graph.edge(a, b), p):
        return False
    va, vb = graph.value(a), graph.value(b)
    if similar(va, vb, p.t_merging):
        return True
    if similar_with_margin(va, vb, p.t_merging, p.m):
        return _similar_to_a_neighbour(graph, a, b, p.t_merging)
    return False


def merge_similar(graph: RegionGraph, p: Params) -> int:
    """Merge neighbours with similar values, largest region first.

    Each region keeps absorbing neighbours (closest value first) until none
    qualifies; the larger of the two regions survives and keeps its value.
    Runs to a fixpoint.
    """
    merges = 0
    while True:
        done: set[int] = set()
        heap = [(-graph.area(r), r) for r in graph.ids()]
        heapq.heapify(heap)
        merged_this_pass = 0
        while heap:
            neg_area, cur = heapq.heappop(heap)
            if cur not in graph or cur in done or graph.area(cur) != -neg_area:
                continue
            while True:
                vc = graph.value(cur)
                candidates = sorted(
                    graph.neighbors(cur),
                    key=lambda n: (abs(graph.value(n) - vc), -graph.area(n), n),
                )
                partner = next((n for n in candidates if should_merge(graph, cur, n, p)), None)
                if partner is None:
                    break
                keep, gone = cur, partner
                if (graph.area(partner), -partner) > (graph.area(cur), -cur):
                    keep, gone = partner, cur
                cur = graph.merge(keep, gone)
                merged_this_pass += 1
            done.add(cur)
        merges += merged_this_pass
        if not merged_this_pass:
            return merges


# -- thick walls -----------------------------------------------------------


def remove_wall_artifacts(graph: RegionGraph, p: Params) -> int:
    """Fuse regions mostly surrounded by other regions into an eligible neighbour.

    Eligible neighbours are at or below d_threshold themselves; the longest
    contact wins.  Regions with no eligible neighbour are left alone.
    """
    merges = 0
    stuck: set[int] = set()
    while True:
        offenders = [
            r for r in graph.ids()
            if r not in stuck and graph.wall_contact_fraction(r) > p.d_threshold
        ]
        if not offenders:
            return merges
        offenders.sort(key=lambda r: (graph.area(r), r))
        progressed = False
        for rid in offenders:
            if rid not in graph or graph.wall_contact_fraction(rid) <= p.d_threshold:
                continue
            eligible = [
                n for n in graph.neighbors(rid)
                if graph.wall_contact_fraction(n) <= p.d_threshold
            ]
            if not eligible:
                log.info("region %d (%.2f region contact) has no eligible neighbour", rid,
                         graph.wall_contact_fraction(rid))
                stuck.add(rid)
                continue
            target = max(eligible, key=lambda n: (graph.contact_length(rid, n), graph.area(n), -n))
            graph.merge(target, rid)
            merges += 1
            progressed = True
            # a merge changes who is eligible; stuck regions get another chance
            stuck.clear()
            break
        if not progressed:
            return merges
