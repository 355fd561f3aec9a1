"""Raster I/O: occupancy maps in, label images and overlays out."""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

DEFAULT_THRESHOLD = 250

# background conventions accepted by load_ground_truth / load_labels
BACKGROUNDS = ("black", "white", "both")


class MapFormatError(ValueError):
    """Raised for rasters that cannot be interpreted as a map or label image."""


class EmptyGroundTruthError(ValueError):
    """Raised when a ground-truth raster contains no region."""


@dataclass(frozen=True)
class GridMap:
    """Binarized map. ``free[y, x]`` is True for free cells, False for occupied."""

    free: np.ndarray

    def __post_init__(self):
        free = np.asarray(self.free, dtype=bool)
        if free.ndim != 2 or free.shape[0] < 1 or free.shape[1] < 1:
            raise ValueError(f"GridMap needs a non-empty 2D array, got shape {free.shape}")
        free.setflags(write=False)
        object.__setattr__(self, "free", free)

    @property
    def height(self) -> int:
        return self.free.shape[0]

    @property
    def width(self) -> int:
        return self.free.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.free.shape

    @property
    def occupied(self) -> np.ndarray:
        return ~self.free


@dataclass(frozen=True)
class LabelImage:
    """Per-pixel region ids; 0 means no region (obstacle or background)."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 2:
            raise ValueError(f"LabelImage needs a 2D array, got shape {labels.shape}")
        if labels.size and labels.min() < 0:
            raise ValueError("labels must be non-negative")
        labels = labels.astype(np.int32, copy=True)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    def region_ids(self) -> list[int]:
        ids = np.unique(self.labels)
        return [int(i) for i in ids if i != 0]

    @property
    def n_regions(self) -> int:
        return len(self.region_ids())

    def check_against(self, grid: GridMap) -> None:
        """Raise if the labels are not a valid segmentation of ``grid``."""
        if self.shape != grid.shape:
            raise ValueError(f"label shape {self.shape} != map shape {grid.shape}")
        if np.any(self.labels[grid.occupied] != 0):
            raise ValueError("occupied cells carry a region label")


def binarize(gray: np.ndarray, threshold: int = DEFAULT_THRESHOLD) -> GridMap:
    """Intensity >= threshold is free; everything else (including unknown gray) is occupied."""
    gray = np.asarray(gray)
    if gray.dtype == bool:
        return GridMap(gray)
    return GridMap(gray >= threshold)


def _open_raster(path) -> Image.Image:
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such file: {path}")
    try:
        img = Image.open(path)
        img.load()
    except UnidentifiedImageError as exc:
        raise MapFormatError(f"unsupported raster format: {path}") from exc
    return img


def _to_gray8(img: Image.Image) -> np.ndarray:
    if img.mode in ("I;16", "I;16B", "I;16L", "I"):
        arr = np.asarray(img, dtype=np.int64)
        top = arr.max() if arr.size else 0
        # 16-bit maps are rescaled to 0-255 so the same threshold applies
        if top > 255:
            arr = arr * 255 // 65535
        return arr.astype(np.uint8)
    if img.mode in ("RGBA", "LA", "PA") or (img.mode == "P" and "transparency" in img.info):
        img = img.convert("RGBA")
        bg = Image.new("RGBA", img.size, (255, 255, 255, 255))
        img = Image.alpha_composite(bg, img)
    return np.asarray(img.convert("L"))


def load_map(path, binarize_threshold: int = DEFAULT_THRESHOLD) -> GridMap:
    if not 0 <= binarize_threshold <= 255:
        raise ValueError("binarize_threshold must be in 0..255")
    img = _open_raster(path)
    return binarize(_to_gray8(img), binarize_threshold)


def _color_keys(img: Image.Image) -> tuple[np.ndarray, int, int]:
    """Encode every pixel's color as one integer; also return the black and white keys."""
    if img.mode in ("I;16", "I;16B", "I;16L", "I"):
        arr = np.asarray(img, dtype=np.int64)
        return arr, 0, 65535 if img.mode.startswith("I;16") else -1
    if img.mode == "1" or img.mode == "L":
        return np.asarray(img.convert("L"), dtype=np.int64), 0, 255
    if img.mode == "P":
        img = img.convert("RGBA" if "transparency" in img.info else "RGB")
    if img.mode in ("RGBA", "LA"):
        rgba = np.asarray(img.convert("RGBA"), dtype=np.int64)
        keys = (rgba[..., 0] << 16) | (rgba[..., 1] << 8) | rgba[..., 2]
        keys[rgba[..., 3] == 0] = 0  # transparent counts as black background
        return keys, 0, 0xFFFFFF
    rgb = np.asarray(img.convert("RGB"), dtype=np.int64)
    return (rgb[..., 0] << 16) | (rgb[..., 1] << 8) | rgb[..., 2], 0, 0xFFFFFF


def labels_from_colors(keys: np.ndarray, background: tuple[int, ...]) -> np.ndarray:
    """Map each distinct non-background key to a dense label 1..K (sorted by key)."""
    mask = ~np.isin(keys, background)
    labels = np.zeros(keys.shape, dtype=np.int32)
    if mask.any():
        _, inverse = np.unique(keys[mask], return_inverse=True)
        labels[mask] = inverse.reshape(-1) + 1
    return labels


def load_labels(path, background: str = "both") -> LabelImage:
    """Read a label or color raster; each distinct non-background color is one region.

    Color defines identity, so disjoint blobs of the same color share a label.
    """
    if background not in BACKGROUNDS:
        raise ValueError(f"background must be one of {BACKGROUNDS}")
    img = _open_raster(path)
    keys, black, white = _color_keys(img)
    bg = {"black": (black,), "white": (white,), "both": (black, white)}[background]
    return LabelImage(labels_from_colors(keys, bg))


def load_ground_truth(path, background: str = "both") -> LabelImage:
    gt = load_labels(path, background)
    if not gt.labels.any():
        raise EmptyGroundTruthError(f"no regions found in ground truth {path}")
    return gt


def distinct_colors(n: int, seed: int = 7) -> np.ndarray:
    """n visually distinct RGB colors (golden-ratio hue walk, fixed seed for the jitter)."""
    import colorsys

    rng = np.random.default_rng(seed)
    out = np.zeros((n, 3), dtype=np.uint8)
    h = rng.random()
    for i in range(n):
        h = (h + 0.618033988749895) % 1.0
        s = 0.55 + 0.35 * ((i * 7) % 3) / 2
        v = 0.95 - 0.25 * ((i * 5) % 2)
        out[i] = [round(255 * c) for c in colorsys.hsv_to_rgb(h, s, v)]
    return out


def colorize(labels: np.ndarray, grid: GridMap | None = None) -> np.ndarray:
    """RGB rendering: obstacles black, unlabeled free space white, regions colored."""
    labels = np.asarray(labels)
    h, w = labels.shape
    rgb = np.full((h, w, 3), 255, dtype=np.uint8)
    if grid is not None:
        rgb[grid.occupied] = 0
    else:
        rgb[labels == 0] = 0
    ids = np.unique(labels)
    ids = ids[ids != 0]
    if ids.size:
        palette = distinct_colors(ids.size)
        index = np.searchsorted(ids, labels)
        mask = labels != 0
        rgb[mask] = palette[index[mask]]
    return rgb


def write_segmentation(seg: LabelImage, path, mode: str = "labels", grid: GridMap | None = None) -> None:
    """Write ``labels`` (16-bit raw ids) or ``colored-overlay`` (8-bit RGB) to ``path``."""
    if mode == "labels":
        if seg.labels.size and seg.labels.max() > 65535:
            raise ValueError("more than 65535 regions cannot be stored in a 16-bit raster")
        img = Image.fromarray(seg.labels.astype(np.uint16))
    elif mode == "colored-overlay":
        img = Image.fromarray(colorize(seg.labels, grid))
    else:
        raise ValueError(f"unknown write mode {mode!r}")
    ext = os.path.splitext(str(path))[1].lower()
    fmt = "PPM" if ext in (".pgm", ".ppm", ".pnm") else "PNG"
    try:
        img.save(path, format=fmt)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def write_gray(values: np.ndarray, path, invert: bool = True) -> None:
    """Normalized 8-bit dump of a scalar image; with ``invert`` darker means larger."""
    values = np.asarray(values, dtype=np.float64)
    top = values.max() if values.size else 0.0
    scaled = values / top if top > 0 else np.zeros_like(values)
    if invert:
        scaled = 1.0 - scaled
    Image.fromarray(np.round(scaled * 255).astype(np.uint8)).save(path)
