"""Binary rasters: boolean algebra, coefficient-parameterized 3x3 morphology,
connected components, and one-pixel boundary extraction.

Pixels outside the image count as background for every neighborhood
operation, so foreground touching the image border erodes (and shows up in
boundary images) exactly like foreground touching interior background.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import ndimage

from .images import GrayImage

_FOUR = ndimage.generate_binary_structure(2, 1)
_EIGHT = ndimage.generate_binary_structure(2, 2)

# Raster-order 3x3 offsets: bit k of a window code is the pixel at
# (dy, dx) = (k // 3 - 1, k % 3 - 1) relative to the window center.
_WINDOW_OFFSETS = [(k // 3 - 1, k % 3 - 1) for k in range(9)]
_CENTER_BIT = 4
_RING_OFFSETS = [off for k, off in enumerate(_WINDOW_OFFSETS) if k != _CENTER_BIT]


@dataclass(eq=False)
class BinaryImage:
    """One bit per pixel; True (1) is foreground, i.e. dark / candidate fin."""

    px: np.ndarray

    def __post_init__(self) -> None:
        self.px = np.ascontiguousarray(self.px, dtype=bool)
        if self.px.ndim != 2:
            raise ValueError(f"expected a (h, w) bool array, got shape {self.px.shape}")

    @property
    def width(self) -> int:
        return self.px.shape[1]

    @property
    def height(self) -> int:
        return self.px.shape[0]

    def foreground_count(self) -> int:
        return int(self.px.sum())

    def same_as(self, other: "BinaryImage") -> bool:
        return self.px.shape == other.px.shape and bool(np.array_equal(self.px, other.px))


@dataclass
class ComponentLabels:
    """Connected-component labeling: 0 is background, ids run 1..count."""

    labels: np.ndarray
    sizes: np.ndarray  # indexed by id; sizes[0] == 0
    count: int


def threshold_apply(g: GrayImage, t: int) -> BinaryImage:
    """Foreground wherever intensity <= t."""
    if not 0 <= t <= 255:
        raise ValueError(f"threshold must be in [0, 255], got {t}")
    return BinaryImage(g.px <= t)


def _neighbor_counts(px: np.ndarray) -> np.ndarray:
    """Count foreground pixels among the 8 neighbors; outside the image is background."""
    padded = np.pad(px.astype(np.uint8), 1)
    h, w = px.shape
    acc = np.zeros((h, w), dtype=np.uint8)
    for dy, dx in _RING_OFFSETS:
        acc += padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
    return acc


def _ring_codes(px: np.ndarray) -> np.ndarray:
    """8-bit code of the neighbor ring around each pixel (raster order, center skipped)."""
    padded = np.pad(px.astype(np.uint16), 1)
    h, w = px.shape
    acc = np.zeros((h, w), dtype=np.uint16)
    for bit, (dy, dx) in enumerate(_RING_OFFSETS):
        acc |= padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w] << bit
    return acc


@lru_cache(maxsize=None)
def _single_cluster_ring() -> np.ndarray:
    """For each 8-bit ring code: do the set positions form one 8-connected cluster?

    Connectivity is evaluated among the ring cells themselves; the center does
    not participate (it is background whenever this table is consulted).
    """
    table = np.zeros(256, dtype=bool)
    for code in range(1, 256):
        cells = [_RING_OFFSETS[bit] for bit in range(8) if code >> bit & 1]
        seen = {cells[0]}
        frontier = [cells[0]]
        while frontier:
            cy, cx = frontier.pop()
            for oy, ox in cells:
                if (oy, ox) not in seen and max(abs(oy - cy), abs(ox - cx)) <= 1:
                    seen.add((oy, ox))
                    frontier.append((oy, ox))
        table[code] = len(seen) == len(cells)
    return table


def _check_coefficient(n: int) -> None:
    if not 1 <= n <= 8:
        raise ValueError(f"neighbor coefficient must be in [1, 8], got {n}")


def erode(b: BinaryImage, n: int = 1) -> BinaryImage:
    """Turn foreground pixels with at least ``n`` background neighbors into background."""
    _check_coefficient(n)
    background = 8 - _neighbor_counts(b.px)
    return BinaryImage(b.px & (background < n))


def dilate(b: BinaryImage, n: int = 1) -> BinaryImage:
    """Turn background pixels with at least ``n`` foreground neighbors into foreground,
    unless the flip would bridge separate foreground clusters of its 3x3 neighborhood."""
    _check_coefficient(n)
    counts = _neighbor_counts(b.px)
    joinable = _single_cluster_ring()[_ring_codes(b.px)]
    flips = ~b.px & (counts >= n) & joinable
    return BinaryImage(b.px | flips)


def opening(b: BinaryImage, n: int = 1) -> BinaryImage:
    """One erosion followed by one dilation, both with coefficient ``n``."""
    return dilate(erode(b, n), n)


def bit_and(a: BinaryImage, b: BinaryImage) -> BinaryImage:
    if a.px.shape != b.px.shape:
        raise ValueError(f"dimension mismatch: {a.px.shape} vs {b.px.shape}")
    return BinaryImage(a.px & b.px)


def bit_xor(a: BinaryImage, b: BinaryImage) -> BinaryImage:
    if a.px.shape != b.px.shape:
        raise ValueError(f"dimension mismatch: {a.px.shape} vs {b.px.shape}")
    return BinaryImage(a.px ^ b.px)


def connected_components(b: BinaryImage, connectivity: str = "eight") -> ComponentLabels:
    """Partition foreground into maximal connected sets under the chosen adjacency."""
    if connectivity == "four":
        structure = _FOUR
    elif connectivity == "eight":
        structure = _EIGHT
    else:
        raise ValueError(f"connectivity must be 'four' or 'eight', got {connectivity!r}")
    labels, count = ndimage.label(b.px, structure=structure)
    sizes = np.bincount(labels.ravel(), minlength=count + 1).astype(np.int64)
    sizes[0] = 0
    return ComponentLabels(labels=labels.astype(np.int32), sizes=sizes, count=int(count))


def _first_in_raster(labels: np.ndarray, candidates: np.ndarray) -> int:
    """Among candidate label ids, pick the one whose first pixel comes earliest."""
    flat = labels.ravel()
    positions = [int(np.argmax(flat == cid)) for cid in candidates]
    return int(candidates[int(np.argmin(positions))])


def _pick_largest(cl: ComponentLabels, candidates: np.ndarray) -> int:
    best = cl.sizes[candidates].max()
    top = candidates[cl.sizes[candidates] == best]
    if len(top) == 1:
        return int(top[0])
    return _first_in_raster(cl.labels, top)


def largest_component(b: BinaryImage) -> BinaryImage:
    """Keep only the biggest blob; equally big blobs tie-break by raster order."""
    cl = connected_components(b, "eight")
    if cl.count == 0:
        raise ValueError("image has no foreground pixels")
    keep = _pick_largest(cl, np.arange(1, cl.count + 1))
    return BinaryImage(cl.labels == keep)


def component_at_seed(b: BinaryImage, seed: tuple[int, int], max_radius: int = 64) -> BinaryImage:
    """Find the blob near a seed point by expanding a square search window.

    The window radius doubles from 4 px up to ``max_radius``; the first window
    containing any foreground decides, and the largest blob intersecting it is
    returned. If every window is empty the whole image falls back to
    :func:`largest_component`.
    """
    sx, sy = int(seed[0]), int(seed[1])
    if not (0 <= sx < b.width and 0 <= sy < b.height):
        raise ValueError(f"seed ({sx},{sy}) outside {b.width}x{b.height} image")
    if not b.px.any():
        raise ValueError("image has no foreground pixels")
    radius = 4
    radii = []
    while True:
        radii.append(min(radius, max_radius))
        if radius >= max_radius:
            break
        radius *= 2
    for r in radii:
        window = (
            slice(max(0, sy - r), min(b.height, sy + r + 1)),
            slice(max(0, sx - r), min(b.width, sx + r + 1)),
        )
        if not b.px[window].any():
            continue
        cl = connected_components(b, "eight")
        ids = np.unique(cl.labels[window])
        ids = ids[ids != 0]
        keep = _pick_largest(cl, ids)
        return BinaryImage(cl.labels == keep)
    return largest_component(b)


def boundary(b: BinaryImage) -> BinaryImage:
    """One-pixel-wide outline: the image XOR its single standard erosion."""
    return bit_xor(b, erode(b, 1))


def window_code_map(b: BinaryImage, interior: bool = True) -> np.ndarray:
    """Encode every 3x3 window as its 9-bit raster-order code.

    ``interior=True`` covers the (h-2) x (w-2) fully-inside placements, keyed by
    window top-left; otherwise one code per pixel with zero padding outside.
    """
    px = b.px.astype(np.uint16)
    if interior:
        if b.height < 3 or b.width < 3:
            raise ValueError("image smaller than 3x3 has no interior windows")
        h, w = b.height - 2, b.width - 2
        acc = np.zeros((h, w), dtype=np.uint16)
        for bit in range(9):
            dy, dx = bit // 3, bit % 3
            acc |= px[dy : dy + h, dx : dx + w] << bit
        return acc
    padded = np.pad(px, 1)
    acc = np.zeros(b.px.shape, dtype=np.uint16)
    for bit, (dy, dx) in enumerate(_WINDOW_OFFSETS):
        acc |= padded[1 + dy : 1 + dy + b.height, 1 + dx : 1 + dx + b.width] << bit
    return acc


def write_pbm(b: BinaryImage, path: str | Path) -> None:
    """Dump as binary PBM (P4); foreground bits render black."""
    packed = np.packbits(b.px, axis=1)
    header = f"P4\n{b.width} {b.height}\n".encode("ascii")
    Path(path).write_bytes(header + packed.tobytes())
