"""Unsupervised threshold selection.

Two independent selectors live here. The first analyzes the shape of the
intensity histogram: positions are classified as rising, falling, or level
from the pixel counts of a symmetric neighborhood of intensity values, and
the first valley (a minimum run preceded by a rise and a peak or plateau)
becomes the threshold. A second valley close behind the next peak signals a
two-toned subject, in which case that valley is chosen instead.

The second selector scores how cleanly a candidate threshold segments the
image. Every 3x3 window of the binary image is scored through a 512-entry
lookup table; the score of a window is the number of four-connected regions
(over both colors) plus the number of long edges, so large solid areas score
1 and checkerboard fragments score 21. Sweeping the threshold in steps of
five and averaging the window scores yields a curve whose first local
minimum marks the threshold that separates foreground from background most
cleanly. Curves with no interior minimum fall back to a plateau midpoint or,
failing that, to a provisional threshold of zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .binary import BinaryImage, threshold_apply, window_code_map
from .images import GrayImage, Histogram

WINDOW_COUNT = 512
SCORE_MIN = 1
SCORE_MAX = 21

CATEGORY_LOCAL_MINIMUM = "local-minimum"
CATEGORY_PLATEAU = "plateau"
CATEGORY_MONOTONE = "monotone"


class ValleyNotFound(RuntimeError):
    """The histogram has no valley; the caller should fall through to the sweep."""


@dataclass(frozen=True)
class ValleyAnalysis:
    first_valley: int
    second_valley: int | None
    chosen: int
    two_toned: bool


@dataclass(frozen=True)
class PixelarityLut:
    """Window-code score table; ``scores[code]`` is the jaggedness of that window."""

    scores: np.ndarray
    connectivity: str


@dataclass(frozen=True)
class PixelarityCurve:
    """Mean window score per threshold, sampled at multiples of the sweep step."""

    samples: list[tuple[int, float]]
    category: str


@dataclass(frozen=True)
class ThresholdChoice:
    threshold: int
    category: str
    provisional: bool


# ---------------------------------------------------------------------------
# Histogram valley analysis
# ---------------------------------------------------------------------------

_LEVEL, _RISING, _FALLING = 0, 1, -1


def neighborhood_sums(h: Histogram, radius: int = 15) -> np.ndarray:
    """Sum of bin counts within +/- radius of each intensity, truncated at the ends."""
    csum = np.concatenate([[0], np.cumsum(h.bins)])
    idx = np.arange(256)
    lo = np.maximum(idx - radius, 0)
    hi = np.minimum(idx + radius, 255)
    return csum[hi + 1] - csum[lo]


def _step_directions(sums: np.ndarray) -> np.ndarray:
    """Direction of each step v-1 -> v; differences within 2% of the target
    position's neighborhood count are level. Integer arithmetic keeps the 2%
    rule exact under any rescaling of the histogram."""
    diff = sums[1:].astype(np.int64) - sums[:-1]
    level = 50 * np.abs(diff) <= sums[1:]
    directions = np.where(level, _LEVEL, np.sign(diff)).astype(np.int64)
    return np.concatenate([[_LEVEL], directions])


def find_valley_threshold(
    h: Histogram, radius: int = 15, two_tone_gap: int = 26
) -> ValleyAnalysis:
    """Locate the first histogram valley, switching to the second for two-toned subjects.

    Scanning left to right, a valley is the (possibly level) run where a
    decline that followed a rise turns back into a rise; the valley position is
    the center of that run. If the peak of the following histogram region sits
    within ``two_tone_gap`` intensity levels of the end of the first valley,
    the subject is likely two-toned and the second valley is chosen.

    Raises:
        ValleyNotFound: If no valley exists (e.g. a unimodal or flat histogram).
    """
    if h.total <= 0:
        raise ValleyNotFound("empty histogram")
    sums = neighborhood_sums(h, radius)
    steps = _step_directions(sums)

    SEEK, RISING, FALLING = range(3)
    state = SEEK
    flat_since = 0  # first position of the current level run
    valleys: list[tuple[int, int]] = []  # (position, end of run)
    peaks: list[int] = []

    for v in range(1, 256):
        d = steps[v]
        if d == _LEVEL:
            continue
        if d == _RISING:
            if state == FALLING:
                run_start, run_end = flat_since, v - 1
                valleys.append(((run_start + run_end) // 2, run_end))
                state = RISING
            elif state == SEEK:
                state = RISING
        else:  # falling
            if state == RISING:
                peaks.append((flat_since + v - 1) // 2)
                state = FALLING
        flat_since = v

    if not valleys:
        raise ValleyNotFound("no histogram valley preceded by a rise and a peak")

    first_pos, first_end = valleys[0]
    second_pos = valleys[1][0] if len(valleys) > 1 else None
    next_peaks = [p for p in peaks if p > first_end]
    two_toned = bool(
        next_peaks and second_pos is not None and next_peaks[0] - first_end < two_tone_gap
    )
    chosen = second_pos if two_toned else first_pos
    return ValleyAnalysis(
        first_valley=first_pos,
        second_valley=second_pos,
        chosen=int(chosen),
        two_toned=two_toned,
    )


# ---------------------------------------------------------------------------
# Window scoring lookup table
# ---------------------------------------------------------------------------


def window_bits(code: int) -> np.ndarray:
    """Decode a 9-bit raster-order window code into a 3x3 bool grid."""
    if not 0 <= code < WINDOW_COUNT:
        raise ValueError(f"window code must be in [0, {WINDOW_COUNT - 1}], got {code}")
    return np.array([[code >> (r * 3 + c) & 1 for c in range(3)] for r in range(3)], dtype=bool)


def window_component_count(code: int, connectivity: str = "four") -> int:
    """Number of connected regions in the window, counting both colors."""
    if connectivity == "four":
        moves = ((-1, 0), (1, 0), (0, -1), (0, 1))
    elif connectivity == "eight":
        moves = tuple((dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0))
    else:
        raise ValueError(f"connectivity must be 'four' or 'eight', got {connectivity!r}")
    grid = window_bits(code)
    seen = np.zeros((3, 3), dtype=bool)
    regions = 0
    for r in range(3):
        for c in range(3):
            if seen[r, c]:
                continue
            regions += 1
            stack = [(r, c)]
            seen[r, c] = True
            while stack:
                cy, cx = stack.pop()
                for dy, dx in moves:
                    ny, nx = cy + dy, cx + dx
                    if 0 <= ny < 3 and 0 <= nx < 3 and not seen[ny, nx]:
                        if grid[ny, nx] == grid[r, c]:
                            seen[ny, nx] = True
                            stack.append((ny, nx))
    return regions


def _edge_signs(grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Signed boundary segments between adjacent differing pixels.

    vertical[r, g]: segment between columns g and g+1 in row r; +1 when the
    left pixel is foreground, -1 when the right one is, 0 for no edge.
    horizontal[g, c]: likewise between rows g and g+1 in column c.
    """
    g8 = grid.astype(np.int8)
    vertical = g8[:, :2] - g8[:, 1:]
    horizontal = g8[:2, :] - g8[1:, :]
    return vertical, horizontal


def window_short_edge_count(code: int) -> int:
    """Count adjacent differing-color pixel pairs (12 possible per window)."""
    vertical, horizontal = _edge_signs(window_bits(code))
    return int(np.count_nonzero(vertical) + np.count_nonzero(horizontal))


def _merged_runs(signs: np.ndarray) -> int:
    """Count maximal runs of equal nonzero sign along one gap line."""
    runs = 0
    prev = 0
    for s in signs:
        if s != 0 and s != prev:
            runs += 1
        prev = s
    return runs


def window_long_edge_count(code: int) -> int:
    """Count long edges: collinear short edges that extend one another with the
    same color on the same side merge into a single edge."""
    vertical, horizontal = _edge_signs(window_bits(code))
    total = 0
    for gap in range(2):
        total += _merged_runs(vertical[:, gap])
        total += _merged_runs(horizontal[gap, :])
    return total


@lru_cache(maxsize=None)
def build_pixelarity_lut(connectivity: str = "four") -> PixelarityLut:
    """Score all 512 window arrangements: region count plus long-edge count."""
    scores = np.empty(WINDOW_COUNT, dtype=np.uint8)
    for code in range(WINDOW_COUNT):
        scores[code] = window_component_count(code, connectivity) + window_long_edge_count(code)
    scores.setflags(write=False)
    return PixelarityLut(scores=scores, connectivity=connectivity)


def score_window(code: int, lut: PixelarityLut) -> int:
    if not 0 <= code < WINDOW_COUNT:
        raise ValueError(f"window code must be in [0, {WINDOW_COUNT - 1}], got {code}")
    return int(lut.scores[code])


def mean_pixelarity(b: BinaryImage, lut: PixelarityLut) -> float:
    """Average window score over all fully-interior 3x3 placements."""
    codes = window_code_map(b, interior=True)
    return float(lut.scores[codes].mean())


# ---------------------------------------------------------------------------
# Threshold sweep over the curve of mean scores
# ---------------------------------------------------------------------------


def pixelarity_curve(g: GrayImage, lut: PixelarityLut, step: int = 5) -> PixelarityCurve:
    """Mean window score for thresholds 0, step, 2*step, ... 255."""
    if step < 1:
        raise ValueError("step must be positive")
    samples = [
        (t, mean_pixelarity(threshold_apply(g, t), lut)) for t in range(0, 256, step)
    ]
    category, _, _ = _classify_curve(samples, step)
    return PixelarityCurve(samples=samples, category=category)


def select_threshold_from_curve(
    c: PixelarityCurve, step: int | None = None
) -> ThresholdChoice:
    """Pick the threshold a curve indicates.

    First local minimum of the merged-equal-run curve wins; with no interior
    minimum, the midpoint of the first sufficiently long plateau following the
    initial rise is used; a curve with neither yields threshold 0 flagged
    provisional so downstream validation can reject the result.
    """
    if not c.samples:
        raise ValueError("empty curve")
    if step is None:
        step = c.samples[1][0] - c.samples[0][0] if len(c.samples) > 1 else 5
    category, threshold, provisional = _classify_curve(c.samples, step)
    return ThresholdChoice(threshold=threshold, category=category, provisional=provisional)


_PLATEAU_REL_TOL = 0.01
_PLATEAU_MIN_LEN = 3


def _classify_curve(
    samples: list[tuple[int, float]], step: int
) -> tuple[str, int, bool]:
    thresholds = [t for t, _ in samples]
    values = [v for _, v in samples]
    n = len(values)

    # Merge exactly-equal consecutive samples, then look for the first interior
    # run strictly lower than both neighbors.
    runs: list[tuple[int, int, float]] = []
    start = 0
    for i in range(1, n + 1):
        if i == n or values[i] != values[start]:
            runs.append((start, i - 1, values[start]))
            start = i
    for k in range(1, len(runs) - 1):
        lo, hi, val = runs[k]
        if val < runs[k - 1][2] and val < runs[k + 1][2]:
            center = (lo + hi) // 2
            return CATEGORY_LOCAL_MINIMUM, thresholds[center], False

    # Plateau: a run of near-equal samples after the curve has risen at least once.
    flat_pair = [
        abs(values[i + 1] - values[i]) <= _PLATEAU_REL_TOL * max(values[i], values[i + 1])
        for i in range(n - 1)
    ]
    first_rise = None
    for i in range(n - 1):
        if values[i + 1] > values[i] and not flat_pair[i]:
            first_rise = i
            break
    if first_rise is not None:
        i = first_rise + 1
        while i < n:
            j = i
            while j < n - 1 and flat_pair[j]:
                j += 1
            if j - i + 1 >= _PLATEAU_MIN_LEN:
                mid = (thresholds[i] + thresholds[j]) // 2
                return CATEGORY_PLATEAU, mid // step * step, False
            i = j + 1

    return CATEGORY_MONOTONE, 0, True
