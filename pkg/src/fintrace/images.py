"""Raster containers, color transforms, and histograms for the trace pipeline.

Conventions used throughout the package: the origin is the top-left pixel,
x grows to the right, y grows downward ("north" is decreasing y), and every
produced intensity is rounded half up into [0, 255].
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

# Neighborhood operations downstream need a full 3x3 window.
MIN_DIM = 3

_LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class ImageLoadError(Exception):
    """Input file missing, undecodable, or not a supported format."""


def _round_half_up(values: np.ndarray) -> np.ndarray:
    return np.floor(values + 0.5)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned window in pixel coordinates: top-left corner plus extent."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self) -> None:
        if self.w < MIN_DIM or self.h < MIN_DIM:
            raise ValueError(
                f"rect extent must be at least {MIN_DIM}x{MIN_DIM}, got {self.w}x{self.h}"
            )

    def contains_point(self, x: int, y: int) -> bool:
        return self.x <= x < self.x + self.w and self.y <= y < self.y + self.h


@dataclass(eq=False)
class RgbImage:
    """8-bit color raster stored as a (height, width, 3) array."""

    px: np.ndarray

    def __post_init__(self) -> None:
        self.px = np.ascontiguousarray(self.px, dtype=np.uint8)
        if self.px.ndim != 3 or self.px.shape[2] != 3:
            raise ValueError(f"expected a (h, w, 3) array, got shape {self.px.shape}")
        if self.height < MIN_DIM or self.width < MIN_DIM:
            raise ValueError(
                f"image must be at least {MIN_DIM}x{MIN_DIM}, got {self.width}x{self.height}"
            )

    @property
    def width(self) -> int:
        return self.px.shape[1]

    @property
    def height(self) -> int:
        return self.px.shape[0]


@dataclass(eq=False)
class GrayImage:
    """8-bit intensity raster stored as a (height, width) array."""

    px: np.ndarray

    def __post_init__(self) -> None:
        self.px = np.ascontiguousarray(self.px, dtype=np.uint8)
        if self.px.ndim != 2:
            raise ValueError(f"expected a (h, w) array, got shape {self.px.shape}")
        if self.height < MIN_DIM or self.width < MIN_DIM:
            raise ValueError(
                f"image must be at least {MIN_DIM}x{MIN_DIM}, got {self.width}x{self.height}"
            )

    @property
    def width(self) -> int:
        return self.px.shape[1]

    @property
    def height(self) -> int:
        return self.px.shape[0]


@dataclass(frozen=True)
class Histogram:
    """256-bin intensity histogram; ``total`` is the pixel count of the source."""

    bins: np.ndarray
    total: int

    def __post_init__(self) -> None:
        if self.bins.shape != (256,):
            raise ValueError("histogram needs exactly 256 bins")
        if int(self.bins.sum()) != self.total:
            raise ValueError("histogram bins do not sum to the stated total")


def load_image(path: str | Path) -> RgbImage:
    """Decode a PNG or JPEG file into an :class:`RgbImage`.

    Args:
        path: Path to the image file.

    Returns:
        The decoded raster. An alpha channel, if present, is discarded.

    Raises:
        ImageLoadError: If the file is unreadable, not PNG/JPEG, or too small.
    """
    path = Path(path)
    try:
        with Image.open(path) as im:
            fmt = im.format
            if fmt not in ("PNG", "JPEG"):
                raise ImageLoadError(f"unsupported format {fmt!r} for {path} (PNG or JPEG only)")
            rgb = im.convert("RGB")
            arr = np.asarray(rgb, dtype=np.uint8)
    except FileNotFoundError as exc:
        raise ImageLoadError(f"image not found: {path}") from exc
    except UnidentifiedImageError as exc:
        raise ImageLoadError(f"cannot decode {path}") from exc
    except OSError as exc:
        raise ImageLoadError(f"cannot read {path}: {exc}") from exc
    if arr.size == 0:
        raise ImageLoadError(f"zero-size image: {path}")
    try:
        return RgbImage(arr)
    except ValueError as exc:
        raise ImageLoadError(f"{path}: {exc}") from exc


def downsample(img: RgbImage, max_dim: int = 600) -> tuple[RgbImage, int]:
    """Halve an image with a 2:1 box filter until max(width, height) <= max_dim.

    Returns ``(image, scale)`` where ``scale`` is the power-of-two ratio between
    original and returned coordinates. Images already small enough come back
    unchanged with scale 1.
    """
    if max_dim < MIN_DIM:
        raise ValueError(f"max_dim must be at least {MIN_DIM}")
    px = img.px
    scale = 1
    while max(px.shape[0], px.shape[1]) > max_dim:
        h2, w2 = px.shape[0] // 2, px.shape[1] // 2
        if h2 < MIN_DIM or w2 < MIN_DIM:
            break  # cannot halve further without losing the 3x3 minimum
        acc = px[: h2 * 2, : w2 * 2].astype(np.uint16)
        total = acc[0::2, 0::2] + acc[0::2, 1::2] + acc[1::2, 0::2] + acc[1::2, 1::2]
        px = ((total + 2) // 4).astype(np.uint8)
        scale *= 2
    if scale == 1:
        return img, 1
    return RgbImage(px), scale


def crop(img: RgbImage, r: Rect) -> RgbImage:
    """Copy the sub-image covered by ``r``; the rect must lie inside the image."""
    if r.x < 0 or r.y < 0 or r.x + r.w > img.width or r.y + r.h > img.height:
        raise ValueError(
            f"rect ({r.x},{r.y},{r.w},{r.h}) extends outside {img.width}x{img.height} image"
        )
    return RgbImage(img.px[r.y : r.y + r.h, r.x : r.x + r.w].copy())


def rgb_to_luma(img: RgbImage) -> GrayImage:
    """Weighted-channel brightness: Y = 0.299 R + 0.587 G + 0.114 B, rounded half up."""
    rgb = img.px.astype(np.float64)
    y = (
        _LUMA_WEIGHTS[0] * rgb[..., 0]
        + _LUMA_WEIGHTS[1] * rgb[..., 1]
        + _LUMA_WEIGHTS[2] * rgb[..., 2]
    )
    return GrayImage(np.clip(_round_half_up(y), 0, 255).astype(np.uint8))


def rgb_to_cyan(img: RgbImage) -> GrayImage:
    """Cyan channel of the CMYK decomposition, scaled back to [0, 255].

    With channels normalized to [0, 1]: c = 1 - r, m = 1 - g, y = 1 - b and
    k = min(c, m, y); pure black (k == 1) maps to cyan 0, every other pixel to
    c - k. The black component is subtracted without renormalizing by (1 - k);
    the threshold sweep downstream is tuned against exactly this transform.
    """
    rgb = img.px.astype(np.float64) / 255.0
    c = 1.0 - rgb[..., 0]
    m = 1.0 - rgb[..., 1]
    y = 1.0 - rgb[..., 2]
    k = np.minimum(np.minimum(c, m), y)
    c = np.where(k == 1.0, 0.0, c - k)
    return GrayImage(np.clip(_round_half_up(c * 255.0), 0, 255).astype(np.uint8))


def histogram(g: GrayImage) -> Histogram:
    """Count pixels per intensity value."""
    bins = np.bincount(g.px.ravel(), minlength=256).astype(np.int64)
    return Histogram(bins=bins, total=int(g.px.size))
