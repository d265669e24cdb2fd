"""Matplotlib rendering of trace reports.

Each report is a single PNG: the photograph with the traced outline and the
user endpoints overlaid, plus whichever threshold diagnostic applies: the
luma histogram with its chosen valley for the first approach, the
window-score sweep with its chosen threshold for the second.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .images import RgbImage
from .pipeline import TraceResult


def render_trace_report(image: RgbImage, result: TraceResult, out_path: str | Path) -> Path:
    """Render one trace result next to its source image; returns the file written."""
    a1 = result.diagnostics.get("approach1", {})
    a2 = result.diagnostics.get("approach2", {})
    panels = 1 + ("valley" in a1) + ("curve" in a2)

    fig, axes = plt.subplots(1, panels, figsize=(5.5 * panels, 4.5))
    axes = np.atleast_1d(axes)

    ax = axes[0]
    ax.imshow(image.px)
    if result.outline is not None:
        pts = np.asarray(result.outline.points)
        ax.plot(pts[:, 0], pts[:, 1], color="red", linewidth=1.2, label=result.method)
        ax.legend(loc="lower right", fontsize=8)
    ax.set_title(f"outcome: {result.outcome}")
    ax.set_axis_off()

    col = 1
    if "valley" in a1:
        ax = axes[col]
        col += 1
        gray = np.floor(
            0.299 * image.px[..., 0].astype(float)
            + 0.587 * image.px[..., 1].astype(float)
            + 0.114 * image.px[..., 2].astype(float)
            + 0.5
        ).astype(np.uint8)
        ax.hist(gray.ravel(), bins=256, range=(0, 256), color="gray")
        ax.axvline(a1["valley"]["chosen"], color="red", linewidth=1.0)
        ax.set_title(f"luma histogram, valley {a1['valley']['chosen']}")
        ax.set_xlabel("intensity")
    if "curve" in a2:
        ax = axes[col]
        ax.plot(a2["curve"]["thresholds"], a2["curve"]["scores"], marker=".", color="steelblue")
        if "threshold" in a2:
            ax.axvline(a2["threshold"], color="red", linewidth=1.0)
        ax.set_title(f"window-score sweep ({a2['curve']['category']})")
        ax.set_xlabel("threshold")
        ax.set_ylabel("mean window score")

    out_path = Path(out_path)
    fig.tight_layout()
    fig.savefig(out_path, dpi=110)
    plt.close(fig)
    return out_path
