"""Ordered outline chains: walking a one-pixel boundary raster between user
start/end points, plus validation, rescaling, and serialization.

The user clicks the leading-edge base first and the trailing-edge base
second, so a valid endpoint pair always has start.x < end.x (the subject
swims to the viewer's left). A pseudo-secant is drawn at the minimum y of
the two points; the northmost boundary pixel on its vertical bisector seeds
the walk, which goes east as far as possible, returns, and goes west
prepending, and neither half ever crosses the bisector. The non-crossing
rule acts like a one-pixel gap cut into closed-form outlines, so they walk
exactly like open-form ones.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .binary import BinaryImage

ORIENTATION_GUIDANCE = (
    "the end point must be to the right of the start point; "
    "trace with the dolphin swimming to your left"
)

# Clockwise direction ring in screen coordinates (y grows downward).
_DX = (1, 0, -1, 0)  # E, S, W, N
_DY = (0, 1, 0, -1)
_E, _S, _W, _N = range(4)


class WalkError(RuntimeError):
    """The boundary raster cannot be walked into a usable chain."""


class EndpointDetectionFailed(RuntimeError):
    """The legacy automatic endpoint scan found no qualifying step triple."""


class Point(NamedTuple):
    x: int
    y: int


def _as_point(p) -> Point:
    return Point(int(p[0]), int(p[1]))


@dataclass(frozen=True)
class EndpointPair:
    """User-selected fin start (leading edge) and end (trailing edge) points."""

    start: Point
    end: Point

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", _as_point(self.start))
        object.__setattr__(self, "end", _as_point(self.end))
        if self.start.x >= self.end.x:
            raise ValueError(ORIENTATION_GUIDANCE)


@dataclass(frozen=True)
class SecantGeometry:
    """Derived geometry of the endpoint pair, in working-image coordinates."""

    secant_y: int
    length: float
    bisector_x: int
    fin_seed: Point


@dataclass
class ChainOutline:
    """Ordered chain of 4-adjacent pixel coordinates from fin start to fin end."""

    points: list[Point]
    method: str = "manual"
    threshold: int = 0
    scale: int = 1
    closed_form: bool = False

    def __post_init__(self) -> None:
        if len(self.points) < 2:
            raise ValueError("an outline chain needs at least two points")
        self.points = [_as_point(p) for p in self.points]

    def arc_length(self) -> float:
        pts = np.asarray(self.points, dtype=np.float64)
        return float(np.hypot(*(pts[1:] - pts[:-1]).T).sum())


def compute_secant(e: EndpointPair, width: int, height: int) -> SecantGeometry:
    """Pseudo-secant row, its length, its vertical bisector, and the blob seed.

    The secant runs at the minimum y of the endpoints with length equal to
    their Euclidean distance. The seed point expected to fall inside the fin
    sits on the bisector, half the secant length above the secant's midpoint,
    clamped to the image.
    """
    length = math.dist(e.start, e.end)
    secant_y = min(e.start.y, e.end.y)
    bisector_x = (e.start.x + e.end.x + 1) // 2
    seed_y = int(math.floor(secant_y - length / 2 + 0.5))
    seed = Point(
        min(max(bisector_x, 0), width - 1),
        min(max(seed_y, 0), height - 1),
    )
    return SecantGeometry(
        secant_y=secant_y, length=length, bisector_x=bisector_x, fin_seed=seed
    )


def _walk_half(
    px: np.ndarray,
    start: Point,
    first_dir: int,
    cut_col: int,
    side: int,
    visited: set[tuple[int, int]],
) -> list[Point]:
    """Walk 4-adjacent foreground pixels from the seed as far as possible.

    Neither half-walk ever crosses the cut column: with side +1 it stays at
    x >= cut_col, with side -1 at x <= cut_col. Pixels on the column itself
    are fair game for either walk (rasterized rings commonly run through it
    in vertical stretches); the shared visited set keeps the two walks
    disjoint.

    Boundary rasters are mostly one pixel wide but thicken to two at noisy
    staircases, where a straight greedy walk can strand itself in the inner
    lane. The walk therefore explores depth-first (preferring to continue
    straight, then turning clockwise) and returns the path to the deepest
    pixel reached, which is the far end of the ring rather than any short
    inner detour.
    """
    h, w = px.shape
    parent: dict[tuple[int, int], tuple[int, int]] = {}
    depth = {(start.x, start.y): 0}
    best_depth, best = 0, (start.x, start.y)
    stack = [(start.x, start.y, first_dir)]
    while stack:
        x, y, d = stack.pop()
        here = (x, y)
        # reverse priority so the straight-ahead candidate pops first
        for turn in (3, 2, 1, 0):
            nd = (d + turn) % 4
            nx, ny = x + _DX[nd], y + _DY[nd]
            if side * (nx - cut_col) < 0 or not (0 <= nx < w and 0 <= ny < h):
                continue
            if not px[ny, nx] or (nx, ny) in visited:
                continue
            visited.add((nx, ny))
            parent[(nx, ny)] = here
            depth[(nx, ny)] = depth[here] + 1
            if depth[(nx, ny)] > best_depth:
                best_depth, best = depth[(nx, ny)], (nx, ny)
            stack.append((nx, ny, nd))
    path: list[Point] = []
    node = best
    while node != (start.x, start.y):
        path.append(Point(*node))
        node = parent[node]
    path.reverse()
    return path


def walk_outline(
    boundary: BinaryImage,
    geo: SecantGeometry,
    e: EndpointPair,
    bisector_search: int = 5,
) -> ChainOutline:
    """Walk the boundary raster into a chain running from near e.start to near e.end.

    The seed is the northmost boundary pixel on the bisector column
    (rasterized outlines may straddle the column, so nearby columns up to
    +/- ``bisector_search`` are tried before giving up). After walking east
    and west the raw chain is trimmed to the indices nearest the endpoints
    and oriented start-to-end.

    Raises:
        WalkError: No boundary pixel near the bisector, or trimming degenerates.
    """
    px = boundary.px
    h, w = px.shape
    seed = None
    for magnitude in range(bisector_search + 1):
        for off in ((magnitude, -magnitude) if magnitude else (0,)):
            col = geo.bisector_x + off
            if 0 <= col < w and px[:, col].any():
                seed = Point(col, int(np.argmax(px[:, col])))
                break
        if seed is not None:
            break
    if seed is None:
        raise WalkError(
            f"no outline pixel within {bisector_search} px of bisector column {geo.bisector_x}"
        )

    cut_col = seed.x
    visited = {(seed.x, seed.y)}
    east = _walk_half(px, seed, _E, cut_col, +1, visited)
    west = _walk_half(px, seed, _W, cut_col, -1, visited)
    raw = list(reversed(west)) + [seed] + east
    if len(raw) < 2:
        raise WalkError("outline walk produced a degenerate chain")

    closed = (
        len(raw) >= 8
        and max(abs(raw[0].x - raw[-1].x), abs(raw[0].y - raw[-1].y)) <= 2
    )

    pts = np.asarray(raw, dtype=np.int64)
    i_start = int(np.argmin((pts[:, 0] - e.start.x) ** 2 + (pts[:, 1] - e.start.y) ** 2))
    i_end = int(np.argmin((pts[:, 0] - e.end.x) ** 2 + (pts[:, 1] - e.end.y) ** 2))
    if i_start == i_end:
        raise WalkError("start and end trim to the same outline point")
    lo, hi = sorted((i_start, i_end))
    trimmed = raw[lo : hi + 1]
    if i_start > i_end:
        trimmed.reverse()
    return ChainOutline(points=trimmed, closed_form=closed)


def detect_endpoints_auto(boundary: BinaryImage) -> EndpointPair:
    """Legacy endpoint detection on a raw outline, kept as a diagnostic fallback.

    The outline is walked with fixed east-north-south-west priority from its
    topmost raster pixel. The start point is the first of three consecutive
    points moving north-east; the end point is the last of three consecutive
    points moving south-east.
    """
    px = boundary.px
    if not px.any():
        raise EndpointDetectionFailed("empty outline image")
    h, w = px.shape
    flat = int(np.argmax(px))
    origin = Point(flat % w, flat // w)

    priority = (_E, _N, _S, _W)
    visited = {(origin.x, origin.y)}

    def walk_branch() -> list[Point]:
        """Deepest path from the origin through its best unvisited neighbor."""
        for nd in priority:
            bx, by = origin.x + _DX[nd], origin.y + _DY[nd]
            if 0 <= bx < w and 0 <= by < h and px[by, bx] and (bx, by) not in visited:
                break
        else:
            return []
        visited.add((bx, by))
        parent = {(bx, by): (origin.x, origin.y)}
        depth = {(origin.x, origin.y): 0, (bx, by): 1}
        best_depth, best = 1, (bx, by)
        stack = [(bx, by)]
        while stack:
            x, y = stack.pop()
            for nd in reversed(priority):
                nx, ny = x + _DX[nd], y + _DY[nd]
                if not (0 <= nx < w and 0 <= ny < h) or not px[ny, nx]:
                    continue
                if (nx, ny) in visited:
                    continue
                visited.add((nx, ny))
                parent[(nx, ny)] = (x, y)
                depth[(nx, ny)] = depth[(x, y)] + 1
                if depth[(nx, ny)] > best_depth:
                    best_depth, best = depth[(nx, ny)], (nx, ny)
                stack.append((nx, ny))
        path: list[Point] = []
        node = best
        while node != (origin.x, origin.y):
            path.append(Point(*node))
            node = parent[node]
        path.reverse()
        return path

    # A closed outline is covered by the first branch walk alone; an open one
    # leaves its far side as a second branch, walked and prepended so the
    # sequence runs end to end, oriented west to east.
    forward = walk_branch()
    backward = walk_branch()
    pts = list(reversed(backward)) + [origin] + forward
    if len(pts) >= 2:
        is_open = max(abs(pts[0].x - pts[-1].x), abs(pts[0].y - pts[-1].y)) > 2
        if is_open and pts[0].x > pts[-1].x:
            pts.reverse()

    steps = []
    for a, b in zip(pts, pts[1:]):
        dx, dy = b.x - a.x, b.y - a.y
        steps.append({(1, 0): _E, (0, 1): _S, (-1, 0): _W, (0, -1): _N}[(dx, dy)])

    ne_first = None
    se_last = None
    for i in range(len(steps) - 1):
        pair = {steps[i], steps[i + 1]}
        if pair == {_E, _N} and ne_first is None:
            ne_first = i
        if pair == {_E, _S}:
            se_last = i
    if ne_first is None or se_last is None:
        raise EndpointDetectionFailed("no north-east or south-east step triple on the outline")
    try:
        return EndpointPair(start=pts[ne_first], end=pts[se_last + 2])
    except ValueError as exc:
        raise EndpointDetectionFailed(f"detected points are misordered: {exc}") from exc


def validate_outline(
    o: ChainOutline,
    e: EndpointPair,
    min_arc_ratio: float = 1.2,
    approach_tol_frac: float = 0.10,
    approach_tol_min_px: float = 10.0,
) -> str | None:
    """Check a chain against the endpoints; returns None when acceptable,
    otherwise a human-readable rejection reason.

    A fin arc is never flatter than its secant, so chains shorter than
    ``min_arc_ratio`` times the endpoint distance are rejected, as are chains
    whose termini stray more than 10% of the secant length (at least 10 px)
    from their endpoints.
    """
    secant = math.dist(e.start, e.end)
    arc = o.arc_length()
    if arc < min_arc_ratio * secant:
        return (
            f"outline too short: arc length {arc:.1f} px is under "
            f"{min_arc_ratio:.2f} x the {secant:.1f} px secant"
        )
    tol = max(approach_tol_frac * secant, approach_tol_min_px)
    d_start = math.dist(o.points[0], e.start)
    if d_start > tol:
        return f"outline does not approach the start point ({d_start:.1f} px away, tolerance {tol:.1f})"
    d_end = math.dist(o.points[-1], e.end)
    if d_end > tol:
        return f"outline does not approach the end point ({d_end:.1f} px away, tolerance {tol:.1f})"
    return None


def _bridge(a: Point, b: Point) -> list[Point]:
    """4-connected straight-line interpolation from a to b, exclusive of a."""
    out: list[Point] = []
    x, y = a
    dx, dy = b.x - x, b.y - y
    sx = 1 if dx > 0 else -1
    sy = 1 if dy > 0 else -1
    nx, ny = abs(dx), abs(dy)
    ix = iy = 0
    while ix < nx or iy < ny:
        # advance along the axis whose fractional progress lags
        if (2 * ix + 1) * ny <= (2 * iy + 1) * nx:
            x += sx
            ix += 1
        else:
            y += sy
            iy += 1
        out.append(Point(x, y))
    return out


def rescale_outline(o: ChainOutline, scale: int, offset: Point | tuple[int, int]) -> ChainOutline:
    """Map a working-scale chain back to full-resolution coordinates.

    Every point becomes offset + scale * point; consecutive duplicates are
    dropped and the unit gaps opened by scaling are bridged so the result is
    4-adjacent again.
    """
    if scale < 1:
        raise ValueError(f"scale must be >= 1, got {scale}")
    off = _as_point(offset)
    mapped = [Point(off.x + scale * p.x, off.y + scale * p.y) for p in o.points]
    out = [mapped[0]]
    for p in mapped[1:]:
        if p == out[-1]:
            continue
        out.extend(_bridge(out[-1], p))
    return ChainOutline(
        points=out,
        method=o.method,
        threshold=o.threshold,
        scale=scale,
        closed_form=o.closed_form,
    )


def outline_to_dict(o: ChainOutline) -> dict:
    return {
        "method": o.method,
        "threshold": o.threshold,
        "scale": o.scale,
        "closed_form": o.closed_form,
        "points": [[p.x, p.y] for p in o.points],
    }


def outline_from_dict(d: dict) -> ChainOutline:
    return ChainOutline(
        points=[Point(int(x), int(y)) for x, y in d["points"]],
        method=d.get("method", "manual"),
        threshold=int(d.get("threshold", 0)),
        scale=int(d.get("scale", 1)),
        closed_form=bool(d.get("closed_form", False)),
    )


def write_outline_json(o: ChainOutline, path: str | Path) -> None:
    Path(path).write_text(json.dumps(outline_to_dict(o), indent=2) + "\n")


def write_outline_xy(o: ChainOutline, path: str | Path) -> None:
    """Two-column 'x y' text format for interoperability with tracing tools."""
    Path(path).write_text("".join(f"{p.x} {p.y}\n" for p in o.points))
