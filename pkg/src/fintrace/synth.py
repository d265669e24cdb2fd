"""Seeded synthetic fin scenes with analytic ground truth.

The test suite uses these scenes in place of field photographs. Three
families exist:

* ``a``: the fin and water separate cleanly in plain luma (dark fin on
  bright water), with dark wave speckles in the water and bright glare spots
  on the fin as distractors.
* ``b``: fin and water share the same luma but sit far apart in the cyan
  channel (neutral gray fin, blue water), so only the cyan route works.
* ``c``: unstructured per-pixel noise; nothing traceable.

Every scene retains the clean silhouette mask and a densely sampled analytic
arc of the fin edge running from the start endpoint over the apex to the end
endpoint, in full-resolution coordinates, for distance comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .chain import EndpointPair, Point
from .images import RgbImage

FAMILIES = ("a", "b", "c")
_FAMILY_CODE = {"a": 1, "b": 2, "c": 3}

# Base colors (R, G, B). Family "b" water is chosen so its luma matches the
# fin's 120 while its cyan channel (max(r,g,b) - r) sits ~130 levels away.
_COLORS = {
    "a": {
        "fin": (56, 54, 58),
        "water": (150, 202, 235),
        "wave": (45, 50, 62),
        "glare": (228, 232, 238),
    },
    "b": {
        "fin": (120, 120, 120),
        "water": (70, 130, 200),
        "wave": (52, 118, 189),
        "glare": (95, 136, 172),
    },
}
_NOISE_SIGMA = {"a": 9.0, "b": 7.0}


@dataclass(frozen=True)
class SynthScene:
    image: RgbImage
    endpoints: EndpointPair
    truth_arc: np.ndarray  # (n, 2) float64 fin-edge samples, start to end
    mask: np.ndarray  # clean fin+body silhouette, bool (h, w)
    family: str
    seed: int


def _fin_profile(rng: np.random.Generator, x_s: int, x_e: int, y_base: int):
    """Analytic fin edge: a skewed, round-topped bump from (x_s, y_base) to
    (x_e, y_base). Returns (arc samples, per-column top y)."""
    span = x_e - x_s
    height = span * rng.uniform(0.66, 0.80)
    skew = rng.uniform(0.72, 0.88)  # <1 pushes the apex aft of center
    sharp = rng.uniform(0.95, 1.25)

    t = np.linspace(0.0, 1.0, 40 * span)
    xs = x_s + span * t
    ys = y_base - height * np.sin(np.pi * t**skew) ** sharp
    arc = np.column_stack([xs, ys])

    top = np.full(span + 1, y_base, dtype=np.int64)
    cols = np.clip(np.round(xs).astype(np.int64) - x_s, 0, span)
    np.minimum.at(top, cols, np.floor(ys + 0.5).astype(np.int64))
    return arc, top


def _ellipse(mask: np.ndarray, cx: float, cy: float, rx: float, ry: float) -> None:
    h, w = mask.shape
    yy, xx = np.ogrid[:h, :w]
    mask |= ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0


def make_scene(family: str, seed: int, size: tuple[int, int] = (320, 240)) -> SynthScene:
    """Build one deterministic scene; identical (family, seed, size) triples
    always produce byte-identical images."""
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}, got {family!r}")
    width, height = size
    rng = np.random.default_rng([_FAMILY_CODE[family], seed])

    if family == "c":
        px = rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8)
        start = Point(int(width * 0.30), int(height * 0.62))
        end = Point(int(width * 0.70), int(height * 0.60))
        return SynthScene(
            image=RgbImage(px),
            endpoints=EndpointPair(start, end),
            truth_arc=np.empty((0, 2)),
            mask=np.zeros((height, width), dtype=bool),
            family=family,
            seed=seed,
        )

    # Fin geometry: base corners are the user endpoints.
    span = int(width * rng.uniform(0.34, 0.42))
    x_s = int(width * rng.uniform(0.24, 0.32))
    x_e = x_s + span
    y_base = int(height * rng.uniform(0.62, 0.70))
    arc, top = _fin_profile(rng, x_s, x_e, y_base)

    mask = np.zeros((height, width), dtype=bool)
    for i, ty in enumerate(top):
        mask[max(0, ty) : y_base + 1, x_s + i] = True

    # Body band under the base line keeps the outline closed-form.
    body_margin = int(rng.uniform(40, 58))
    body_depth = int(rng.uniform(26, 36))
    bx0 = max(10, x_s - body_margin)
    bx1 = min(width - 10, x_e + body_margin)
    mask[y_base : min(height - 10, y_base + body_depth), bx0:bx1] = True

    colors = _COLORS[family]
    px = np.empty((height, width, 3), dtype=np.float64)
    px[:] = colors["water"]
    px[mask] = colors["fin"]

    # Wave speckles in open water, kept clear of the silhouette.
    keepout = ndimage.binary_dilation(mask, iterations=14)
    waves = np.zeros_like(mask)
    for _ in range(int(rng.integers(3, 7))):
        for _attempt in range(40):
            cx = rng.uniform(8, width - 8)
            cy = rng.uniform(8, height - 8)
            if not keepout[int(cy), int(cx)]:
                _ellipse(waves, cx, cy, rng.uniform(2.5, 6.0), rng.uniform(1.5, 4.0))
                break
    waves &= ~keepout
    px[waves] = colors["wave"]

    # Glare spots well inside the fin.
    interior = ndimage.binary_erosion(mask, iterations=8)
    interior[y_base - 6 :, :] = False
    glare = np.zeros_like(mask)
    inter_ys, inter_xs = np.nonzero(interior)
    if len(inter_ys):
        for _ in range(int(rng.integers(1, 4))):
            j = int(rng.integers(0, len(inter_ys)))
            _ellipse(glare, inter_xs[j], inter_ys[j], rng.uniform(1.5, 3.5), rng.uniform(1.5, 3.0))
        glare &= interior
        px[glare] = colors["glare"]

    px += rng.normal(0.0, _NOISE_SIGMA[family], size=px.shape)
    px = np.clip(np.floor(px + 0.5), 0, 255).astype(np.uint8)

    return SynthScene(
        image=RgbImage(px),
        endpoints=EndpointPair(Point(x_s, y_base), Point(x_e, y_base)),
        truth_arc=arc,
        mask=mask,
        family=family,
        seed=seed,
    )


def symmetric_hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two point sets of shape (n, 2)."""
    from scipy.spatial import cKDTree

    if len(a) == 0 or len(b) == 0:
        return math.inf
    ta, tb = cKDTree(a), cKDTree(b)
    return float(max(tb.query(a)[0].max(), ta.query(b)[0].max()))
