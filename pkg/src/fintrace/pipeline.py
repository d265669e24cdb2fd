"""Tiered autotrace orchestration.

A trace request is cropped to the viewport (or to a padded box around the
endpoints), downsampled, and handed to the first approach: plain luma
intensity, a histogram-valley threshold, morphological refinement, and a
boundary walk between the user endpoints. Only when that fails does the
second approach run: the cyan channel of the CMYK decomposition, thresholded
at the best point of the window-score sweep, then the same refinement and
walk. Failures are data, not exceptions; every stage leaves a record in the
result diagnostics.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

from .binary import (
    BinaryImage,
    bit_and,
    boundary,
    component_at_seed,
    dilate,
    erode,
    largest_component,
    opening,
    threshold_apply,
    write_pbm,
)
from .chain import (
    ChainOutline,
    EndpointPair,
    Point,
    SecantGeometry,
    WalkError,
    compute_secant,
    outline_to_dict,
    rescale_outline,
    validate_outline,
    walk_outline,
)
from .images import Rect, RgbImage, crop, downsample, histogram, rgb_to_cyan, rgb_to_luma
from .thresholding import (
    ValleyNotFound,
    build_pixelarity_lut,
    find_valley_threshold,
    pixelarity_curve,
    select_threshold_from_curve,
)

logger = logging.getLogger(__name__)

TIER_AUTO = "auto"
TIER_APPROACH1 = "approach1"
TIER_APPROACH2 = "approach2"
TIERS = (TIER_AUTO, TIER_APPROACH1, TIER_APPROACH2)


@dataclass(frozen=True)
class TraceConfig:
    """Tunable knobs; defaults are the values the test fixtures are tuned to."""

    max_dim: int = 600
    pad_px: int = 100
    box_height_ratio: float = 1.5
    open_iterations: int = 2
    heavy_coefficient: int = 5
    heavy_erosion_cap: int = 10
    seed_max_radius: int = 64
    valley_radius: int = 15
    two_tone_gap: int = 26
    curve_step: int = 5
    min_arc_ratio: float = 1.2
    approach_tol_frac: float = 0.10
    approach_tol_min_px: float = 10.0
    bisector_search: int = 5
    debug_dir: str | None = None


@dataclass
class TraceRequest:
    image: RgbImage
    endpoints: EndpointPair
    viewport: Rect | None = None
    tier: str = TIER_AUTO
    config: TraceConfig = field(default_factory=TraceConfig)

    def __post_init__(self) -> None:
        if self.tier not in TIERS:
            raise ValueError(f"tier must be one of {TIERS}, got {self.tier!r}")


@dataclass
class TraceResult:
    outcome: str  # "success" | "failure"
    outline: ChainOutline | None
    method: str | None
    threshold: int | None
    diagnostics: dict

    @property
    def success(self) -> bool:
        return self.outcome == "success"

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "method": self.method,
            "threshold": self.threshold,
            "outline": outline_to_dict(self.outline) if self.outline else None,
            "diagnostics": self.diagnostics,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


class _Rejected(Exception):
    """Internal: a refinement stage rejected the trace; the reason is data."""


class _DebugDump:
    """Writes per-stage PBM snapshots when a debug directory is configured."""

    def __init__(self, directory: str | Path | None, prefix: str):
        self.directory = Path(directory) if directory else None
        self.prefix = prefix
        self.counter = 0
        if self.directory:
            self.directory.mkdir(parents=True, exist_ok=True)

    def save(self, name: str, b: BinaryImage) -> None:
        if not self.directory:
            return
        self.counter += 1
        write_pbm(b, self.directory / f"{self.prefix}_{self.counter:02d}_{name}.pbm")


def _endpoint_box(e: EndpointPair, width: int, height: int, cfg: TraceConfig) -> Rect:
    """Padded box around the endpoints for requests without a viewport: 100 px
    of horizontal padding and a height of one and a half times the width,
    anchored so the endpoints keep their padding below, clamped to the image."""
    x0 = min(e.start.x, e.end.x) - cfg.pad_px
    x1 = max(e.start.x, e.end.x) + cfg.pad_px
    box_h = int(round(cfg.box_height_ratio * (x1 - x0)))
    y1 = max(e.start.y, e.end.y) + cfg.pad_px
    y0 = min(min(e.start.y, e.end.y) - cfg.pad_px, y1 - box_h)
    x0, y0 = max(0, x0), max(0, y0)
    x1, y1 = min(width, x1), min(height, y1)
    if x1 - x0 < 3 or y1 - y0 < 3:
        raise ValueError("degenerate crop around the endpoints")
    return Rect(x0, y0, x1 - x0, y1 - y0)


def preprocess(
    req: TraceRequest,
) -> tuple[RgbImage, int, Rect, EndpointPair]:
    """Crop, downsample, and map the endpoints into working coordinates.

    Returns (working image, scale, crop rect, working endpoints).
    """
    img, e, cfg = req.image, req.endpoints, req.config
    for label, p in (("start", e.start), ("end", e.end)):
        if not (0 <= p.x < img.width and 0 <= p.y < img.height):
            raise ValueError(f"{label} point {tuple(p)} lies outside the image")
    if req.viewport is not None:
        rect = req.viewport
        for label, p in (("start", e.start), ("end", e.end)):
            if not rect.contains_point(p.x, p.y):
                raise ValueError(f"{label} point {tuple(p)} lies outside the viewport")
    else:
        rect = _endpoint_box(e, img.width, img.height, cfg)
    working, scale = downsample(crop(img, rect), cfg.max_dim)

    def to_working(p: Point) -> Point:
        return Point(
            min((p.x - rect.x) // scale, working.width - 1),
            min((p.y - rect.y) // scale, working.height - 1),
        )

    ws, we = to_working(e.start), to_working(e.end)
    if ws.x >= we.x:
        raise ValueError("endpoints collapse onto the same column after downsampling")
    return working, scale, rect, EndpointPair(ws, we)


def _refine(binary: BinaryImage, cfg: TraceConfig, debug: _DebugDump) -> BinaryImage:
    """Morphological cleanup: openings, heavy-coefficient erosions run to a
    fixpoint, matching dilations, then AND with the pre-morphology image so
    no new object pixels appear."""
    img = binary
    for _ in range(cfg.open_iterations):
        img = opening(img, 1)
    for _ in range(cfg.heavy_erosion_cap):
        nxt = erode(img, cfg.heavy_coefficient)
        if nxt.same_as(img):
            break
        img = nxt
    for _ in range(cfg.open_iterations):
        img = dilate(img, 1)
    img = bit_and(img, binary)
    debug.save("refined", img)
    return img


def _extract_chain(
    binary: BinaryImage,
    geo: SecantGeometry,
    e: EndpointPair,
    cfg: TraceConfig,
    debug: _DebugDump,
    diag: dict,
) -> ChainOutline:
    """Shared back half of both approaches: refine, select the blob at the
    seed, outline it, walk, and validate. Raises _Rejected with the reason."""
    refined = _refine(binary, cfg, debug)
    try:
        blob = component_at_seed(refined, geo.fin_seed, cfg.seed_max_radius)
    except ValueError:
        raise _Rejected("no foreground pixels survive refinement")
    diag["blob_size"] = blob.foreground_count()
    debug.save("blob", blob)

    ring = boundary(blob)
    try:
        ring = largest_component(ring)
    except ValueError:
        raise _Rejected("blob has no boundary")
    diag["outline_size"] = ring.foreground_count()
    debug.save("outline", ring)

    try:
        chain = walk_outline(ring, geo, e, cfg.bisector_search)
    except WalkError as exc:
        raise _Rejected(str(exc))
    diag["chain_points"] = len(chain.points)
    diag["closed_form"] = chain.closed_form

    reason = validate_outline(
        chain,
        e,
        min_arc_ratio=cfg.min_arc_ratio,
        approach_tol_frac=cfg.approach_tol_frac,
        approach_tol_min_px=cfg.approach_tol_min_px,
    )
    if reason is not None:
        raise _Rejected(reason)
    return chain


def approach1(
    working: RgbImage,
    e: EndpointPair,
    geo: SecantGeometry,
    cfg: TraceConfig,
    debug_dir: str | Path | None = None,
) -> tuple[ChainOutline | None, dict]:
    """Luma intensity image, histogram-valley threshold, refinement, walk."""
    debug = _DebugDump(debug_dir, "a1")
    diag: dict = {"status": "rejected"}
    gray = rgb_to_luma(working)
    try:
        valley = find_valley_threshold(
            histogram(gray), radius=cfg.valley_radius, two_tone_gap=cfg.two_tone_gap
        )
    except ValleyNotFound as exc:
        diag["reason"] = str(exc)
        return None, diag
    diag["valley"] = {
        "first": valley.first_valley,
        "second": valley.second_valley,
        "chosen": valley.chosen,
        "two_toned": valley.two_toned,
    }
    diag["threshold"] = valley.chosen

    binary = threshold_apply(gray, valley.chosen)
    debug.save("binary", binary)
    try:
        chain = _extract_chain(binary, geo, e, cfg, debug, diag)
    except _Rejected as exc:
        diag["reason"] = str(exc)
        return None, diag
    diag["status"] = "success"
    return replace(chain, method=TIER_APPROACH1, threshold=valley.chosen), diag


def approach2(
    working: RgbImage,
    e: EndpointPair,
    geo: SecantGeometry,
    cfg: TraceConfig,
    debug_dir: str | Path | None = None,
) -> tuple[ChainOutline | None, dict]:
    """Cyan-channel intensity image, window-score threshold sweep, refinement, walk.

    The fin is cyan-poor against cyan-rich water, so foreground-at-or-below
    the threshold already selects the fin in the cyan image just as it selects
    the dark fin in the luma image; no polarity flip is needed.
    """
    debug = _DebugDump(debug_dir, "a2")
    diag: dict = {"status": "rejected"}
    cyan = rgb_to_cyan(working)
    lut = build_pixelarity_lut()
    curve = pixelarity_curve(cyan, lut, step=cfg.curve_step)
    choice = select_threshold_from_curve(curve, step=cfg.curve_step)
    diag["curve"] = {
        "thresholds": [t for t, _ in curve.samples],
        "scores": [s for _, s in curve.samples],
        "category": curve.category,
    }
    diag["threshold"] = choice.threshold
    diag["provisional"] = choice.provisional

    binary = threshold_apply(cyan, choice.threshold)
    debug.save("binary", binary)
    try:
        chain = _extract_chain(binary, geo, e, cfg, debug, diag)
    except _Rejected as exc:
        diag["reason"] = str(exc)
        return None, diag
    diag["status"] = "success"
    return replace(chain, method=TIER_APPROACH2, threshold=choice.threshold), diag


def autotrace(req: TraceRequest) -> TraceResult:
    """Run the tiered trace; the second approach runs only when the first fails.

    Raises ValueError for invalid requests (bad endpoints, degenerate crops);
    algorithmic failure is reported inside the returned TraceResult.
    """
    cfg = req.config
    working, scale, rect, wend = preprocess(req)
    offset = Point(rect.x, rect.y)
    geo = compute_secant(wend, working.width, working.height)
    diagnostics: dict = {
        "preprocess": {
            "crop": [rect.x, rect.y, rect.w, rect.h],
            "scale": scale,
            "working_size": [working.width, working.height],
            "endpoints": [[wend.start.x, wend.start.y], [wend.end.x, wend.end.y]],
        },
        "secant": {
            "secant_y": geo.secant_y,
            "length": geo.length,
            "bisector_x": geo.bisector_x,
            "fin_seed": [geo.fin_seed.x, geo.fin_seed.y],
        },
    }

    outline: ChainOutline | None = None
    method: str | None = None
    if req.tier in (TIER_AUTO, TIER_APPROACH1):
        outline, diagnostics["approach1"] = approach1(
            working, wend, geo, cfg, cfg.debug_dir
        )
        if outline is not None:
            method = TIER_APPROACH1
    else:
        diagnostics["approach1"] = {"status": "skipped"}

    if outline is None and req.tier in (TIER_AUTO, TIER_APPROACH2):
        outline, diagnostics["approach2"] = approach2(
            working, wend, geo, cfg, cfg.debug_dir
        )
        if outline is not None:
            method = TIER_APPROACH2
    else:
        diagnostics["approach2"] = {"status": "skipped"}

    if outline is None:
        logger.debug("autotrace failed: %s", diagnostics)
        return TraceResult("failure", None, None, None, diagnostics)

    full = rescale_outline(outline, scale, offset)
    logger.debug("autotrace succeeded via %s at threshold %d", method, outline.threshold)
    return TraceResult("success", full, method, outline.threshold, diagnostics)
