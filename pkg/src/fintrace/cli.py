"""Command-line interface.

Exit codes partition outcomes: 0 success, 1 usage or I/O error, 2 the
algorithm ran but could not produce a usable outline.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .chain import EndpointPair, write_outline_json
from .images import ImageLoadError, Rect, load_image
from .pipeline import TIERS, TraceConfig, TraceRequest, TraceResult, autotrace
from .thresholding import build_pixelarity_lut

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_TRACE = 2

MANIFEST_COLUMNS = ("image", "start_x", "start_y", "end_x", "end_y", "vx", "vy", "vw", "vh")


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; this CLI reserves 2 for
    # algorithmic failure, so usage errors must exit 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_xy(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}")
    return int(parts[0]), int(parts[1])


def _parse_rect(text: str) -> tuple[int, int, int, int]:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"expected 'x,y,w,h', got {text!r}")
    return tuple(int(p) for p in parts)  # type: ignore[return-value]


def _tier(value: str) -> str:
    aliases = {"1": "approach1", "2": "approach2"}
    tier = aliases.get(value, value)
    if tier not in TIERS:
        raise argparse.ArgumentTypeError(f"tier must be auto, 1, or 2, got {value!r}")
    return tier


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fintrace", description="Trace dorsal fin outlines in photographs.")
    sub = parser.add_subparsers(dest="command", required=True)

    trace = sub.add_parser("trace", help="trace a single image")
    trace.add_argument("--image", required=True, help="PNG or JPEG photograph")
    trace.add_argument("--start", required=True, type=_parse_xy, metavar="X,Y",
                       help="fin start point (leading edge base)")
    trace.add_argument("--end", required=True, type=_parse_xy, metavar="X,Y",
                       help="fin end point (trailing edge base)")
    trace.add_argument("--viewport", type=_parse_rect, metavar="X,Y,W,H",
                       help="restrict the trace to this region")
    trace.add_argument("--tier", type=_tier, default="auto", help="auto (default), 1, or 2")
    trace.add_argument("--out", help="outline JSON path (default: <image>.outline.json)")
    trace.add_argument("--debug-dir", help="write per-stage PBM dumps here")
    trace.add_argument("--report-dir", help="render a trace report figure here")
    trace.add_argument("--max-dim", type=int, default=600,
                       help="downsample the working image to this size (default 600)")

    batch = sub.add_parser("batch", help="trace every row of a CSV manifest")
    batch.add_argument("manifest", help=f"CSV with columns {','.join(MANIFEST_COLUMNS)}")
    batch.add_argument("--out-dir", help="output directory (default: manifest directory)")
    batch.add_argument("--summary", help="summary CSV path (default: <out-dir>/summary.csv)")
    batch.add_argument("--report-dir", help="render per-image report figures here")
    batch.add_argument("--tier", type=_tier, default="auto")
    batch.add_argument("--max-dim", type=int, default=600)

    lut = sub.add_parser("lut", help="audit the 512-entry window score table")
    lut.add_argument("--dump", required=True, help="write scores as CSV (index,score)")

    serve = sub.add_parser("serve", help="run the trace-review HTTP service")
    serve.add_argument("--port", type=int, default=8075)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--images", help="directory of PNG/JPEG images to serve")
    serve.add_argument("--ui-dir", help="serve a built web UI from this directory at /ui")

    return parser


def _run_trace(
    image_path: Path,
    start: tuple[int, int],
    end: tuple[int, int],
    viewport: tuple[int, int, int, int] | None,
    tier: str,
    max_dim: int,
    outline_path: Path,
    debug_dir: str | None = None,
    report_dir: Path | None = None,
) -> TraceResult:
    """Load, trace, and write outputs; raises ImageLoadError/ValueError on bad input."""
    image = load_image(image_path)
    request = TraceRequest(
        image=image,
        endpoints=EndpointPair(start=start, end=end),
        viewport=Rect(*viewport) if viewport else None,
        tier=tier,
        config=TraceConfig(max_dim=max_dim, debug_dir=debug_dir),
    )
    result = autotrace(request)

    diagnostics_path = _sibling(outline_path, ".diagnostics.json")
    diagnostics_path.write_text(result.to_json() + "\n")
    if result.success:
        write_outline_json(result.outline, outline_path)
    if report_dir is not None:
        from .report import render_trace_report

        report_dir.mkdir(parents=True, exist_ok=True)
        render_trace_report(image, result, report_dir / f"{image_path.stem}.trace.png")
    return result


def _sibling(outline_path: Path, suffix: str) -> Path:
    name = outline_path.name
    if name.endswith(".outline.json"):
        name = name[: -len(".outline.json")]
    elif name.endswith(".json"):
        name = name[: -len(".json")]
    return outline_path.with_name(name + suffix)


def cmd_trace(args) -> int:
    image_path = Path(args.image)
    outline_path = (
        Path(args.out) if args.out else image_path.with_name(image_path.stem + ".outline.json")
    )
    report_dir = Path(args.report_dir) if args.report_dir else None
    try:
        result = _run_trace(
            image_path, args.start, args.end, args.viewport, args.tier, args.max_dim,
            outline_path, debug_dir=args.debug_dir, report_dir=report_dir,
        )
    except (ImageLoadError, ValueError) as exc:
        print(f"fintrace: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not result.success:
        diagnostics = _sibling(outline_path, ".diagnostics.json")
        print(f"fintrace: no usable outline; diagnostics in {diagnostics}", file=sys.stderr)
        return EXIT_NO_TRACE
    print(f"outline written to {outline_path} ({result.method}, threshold {result.threshold})")
    return EXIT_OK


def _parse_manifest_row(row: dict):
    """Returns (image, start, end, viewport) or raises ValueError."""
    image = (row.get("image") or "").strip()
    if not image:
        raise ValueError("missing image path")
    try:
        start = (int(row["start_x"]), int(row["start_y"]))
        end = (int(row["end_x"]), int(row["end_y"]))
    except (KeyError, TypeError, ValueError):
        raise ValueError("missing or malformed endpoint columns")
    viewport = None
    vraw = [(row.get(k) or "").strip() for k in ("vx", "vy", "vw", "vh")]
    if any(vraw):
        if not all(vraw):
            raise ValueError("incomplete viewport columns")
        try:
            viewport = tuple(int(v) for v in vraw)
        except ValueError:
            raise ValueError("malformed viewport columns")
    return image, start, end, viewport


def cmd_batch(args) -> int:
    manifest_path = Path(args.manifest)
    try:
        with manifest_path.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        print(f"fintrace: cannot read manifest: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not rows:
        print("fintrace: manifest has no data rows", file=sys.stderr)
        return EXIT_USAGE

    out_dir = Path(args.out_dir) if args.out_dir else manifest_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    report_dir = Path(args.report_dir) if args.report_dir else None
    summary_path = Path(args.summary) if args.summary else out_dir / "summary.csv"

    summary_rows = []
    successes = 0
    for row in rows:
        try:
            image, start, end, viewport = _parse_manifest_row(row)
        except ValueError as exc:
            summary_rows.append(((row.get("image") or "<blank>"), "error", "", "", str(exc)))
            continue
        image_path = Path(image)
        if not image_path.is_absolute():
            image_path = manifest_path.parent / image_path
        outline_path = out_dir / f"{image_path.stem}.outline.json"
        try:
            result = _run_trace(
                image_path, start, end, viewport, args.tier, args.max_dim,
                outline_path, report_dir=report_dir,
            )
        except (ImageLoadError, ValueError) as exc:
            summary_rows.append((image_path.name, "error", "", "", str(exc)))
            continue
        if result.success:
            successes += 1
            summary_rows.append((image_path.name, "success", result.method, result.threshold, ""))
        else:
            reasons = [
                d.get("reason")
                for d in (result.diagnostics.get("approach1"), result.diagnostics.get("approach2"))
                if d and d.get("reason")
            ]
            summary_rows.append((image_path.name, "failure", "", "", " | ".join(reasons)))

    with summary_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image", "outcome", "method", "threshold", "reason"])
        writer.writerows(summary_rows)
    print(f"{successes}/{len(rows)} traced; summary in {summary_path}")
    return EXIT_OK if successes else EXIT_NO_TRACE


def cmd_lut(args) -> int:
    lut = build_pixelarity_lut()
    out = Path(args.dump)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "score"])
        for index, score in enumerate(lut.scores):
            writer.writerow([index, int(score)])
    print(f"512 window scores written to {out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    app = create_app(image_dir=args.images, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"trace": cmd_trace, "batch": cmd_batch, "lut": cmd_lut, "serve": cmd_serve}
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
