"""Synthetic maps with known room layouts, used for tests, sweeps and benchmarks.

Every builder returns ``(GridMap, LabelImage)``; the labels mark the intended
rooms, with door openings left unlabeled.
"""
from __future__ import annotations

import numpy as np

from .map_io import GridMap, LabelImage


def two_rooms_with_door(room: int = 15, door: int = 3, wall: int = 3, margin: int = 1):
    """Two square rooms side by side, separated by a wall with a centred door gap."""
    h = room + 2 * margin
    w = 2 * room + wall + 2 * margin
    free = np.zeros((h, w), dtype=bool)
    gt = np.zeros((h, w), dtype=np.int32)
    top, left = margin, margin
    free[top:top + room, left:left + room] = True
    gt[top:top + room, left:left + room] = 1
    x2 = left + room + wall
    free[top:top + room, x2:x2 + room] = True
    gt[top:top + room, x2:x2 + room] = 2
    y0 = top + (room - door) // 2
    free[y0:y0 + door, left + room:x2] = True
    return GridMap(free), LabelImage(gt)


def room_with_corridor(room: int = 15, width: int = 5, length: int = 40, margin: int = 1):
    """Square room with a corridor leaving one side at mid-height (no door)."""
    h = room + 2 * margin
    w = room + length + 2 * margin
    free = np.zeros((h, w), dtype=bool)
    gt = np.zeros((h, w), dtype=np.int32)
    top, left = margin, margin
    free[top:top + room, left:left + room] = True
    gt[top:top + room, left:left + room] = 1
    y0 = top + (room - width) // 2
    free[y0:y0 + width, left + room:left + room + length] = True
    gt[y0:y0 + width, left + room:left + room + length] = 2
    return GridMap(free), LabelImage(gt)


def all_free(size: int = 20):
    return GridMap(np.ones((size, size), dtype=bool)), LabelImage(np.ones((size, size), dtype=np.int32))


def office(rooms: int = 3, room: int = 16, corridor: int = 6, door: int = 3, wall: int = 2):
    """A row of rooms opening through doors onto a corridor running beneath them."""
    w = rooms * room + (rooms + 1) * wall
    h = wall + room + wall + corridor + wall
    free = np.zeros((h, w), dtype=bool)
    gt = np.zeros((h, w), dtype=np.int32)
    cy = wall + room + wall
    free[cy:cy + corridor, wall:w - wall] = True
    gt[cy:cy + corridor, wall:w - wall] = rooms + 1
    for i in range(rooms):
        x = wall + i * (room + wall)
        free[wall:wall + room, x:x + room] = True
        gt[wall:wall + room, x:x + room] = i + 1
        dx = x + (room - door) // 2
        free[wall + room:cy, dx:dx + door] = True
    return GridMap(free), LabelImage(gt)


def l_corridor(width: int = 5, arm: int = 30, room: int = 14, door: int = 3, wall: int = 1):
    """An L-shaped corridor with a room behind a door at the end of one arm."""
    size = wall + arm + wall + room + wall
    free = np.zeros((size, size), dtype=bool)
    gt = np.zeros((size, size), dtype=np.int32)
    free[wall:wall + width, wall:wall + arm] = True
    free[wall:wall + arm, wall:wall + width] = True
    gt[free] = 2
    rx = wall + arm + wall
    free[wall:wall + room, rx:rx + room] = True
    gt[wall:wall + room, rx:rx + room] = 1
    dy = wall + (width - door) // 2
    free[dy:dy + door, wall + arm:rx] = True
    return GridMap(free), LabelImage(gt)


def suite() -> dict[str, tuple[GridMap, LabelImage]]:
    """The synthetic evaluation suite."""
    return {
        "two_rooms_door": two_rooms_with_door(),
        "room_corridor": room_with_corridor(),
        "all_free": all_free(),
        "office": office(),
        "l_corridor": l_corridor(),
    }


def floor_plan(height: int = 2000, width: int = 2000, cell: int = 200, corridor: int = 24,
               wall: int = 4, door: int = 20, seed: int = 0):
    """Large office-like plan: blocks of rooms separated by a corridor grid.

    Room sizes jitter with ``seed``; every room gets one door onto the corridor
    above or below it.
    """
    rng = np.random.default_rng(seed)
    free = np.zeros((height, width), dtype=bool)
    gt = np.zeros((height, width), dtype=np.int32)
    label = 0
    # horizontal corridors between every pair of room rows
    pitch = 2 * cell + corridor + wall
    rows = []
    y = wall
    while y + pitch <= height:
        rows.append(y)
        y += pitch
    corridor_label = {}
    for y in rows:
        cy = y + cell
        label += 1
        corridor_label[y] = label
        free[cy:cy + corridor, wall:width - wall] = True
        gt[cy:cy + corridor, wall:width - wall] = label
    # vertical corridor on the left joins them all
    if rows:
        bottom = rows[-1] + pitch - wall
        free[wall:bottom, wall:wall + corridor] = True
        gt[wall:bottom, wall:wall + corridor] = corridor_label[rows[0]]
        for y in rows[1:]:
            gt[gt == corridor_label[y]] = corridor_label[rows[0]]
    for y in rows:
        cy = y + cell
        x = wall + corridor + wall
        while x < width - wall - 40:
            rw = int(rng.integers(int(cell * 0.6), int(cell * 1.2)))
            rw = min(rw, width - wall - x)
            for top in (y, cy + corridor + wall):
                rh = cell - wall
                label += 1
                free[top:top + rh, x:x + rw] = True
                gt[top:top + rh, x:x + rw] = label
                dx = x + rw // 2 - door // 2
                if top < cy:
                    free[top + rh:cy, dx:dx + door] = True
                else:
                    free[cy + corridor:top, dx:dx + door] = True
            x += rw + wall
    return GridMap(free), LabelImage(gt)
