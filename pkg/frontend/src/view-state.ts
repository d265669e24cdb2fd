import type {
  ImageInfo,
  Mode,
  Pt,
  TracePort,
  TraceResponse,
  ViewportRect,
} from "./types.js";

export const GUIDANCE_MISORDERED =
  "Click the start point before the end point: the dolphin must be " +
  "swimming to your left. The points have been cleared; click the start " +
  "point of the fin.";

const STATUS_CLICK_START = "Click the start point of the fin (leading edge base).";
const STATUS_CLICK_END = "Now click the end point of the fin (trailing edge base).";
const STATUS_TRACING = "Tracing…";
const STATUS_ERASE =
  "Trace found. Erase any stray points, or switch tools, then Accept.";
const STATUS_OUTSIDE = "That click was outside the image; click on the photograph.";

/** Display-pixel eraser radius; divided by zoom to get image pixels. */
export const ERASER_RADIUS_PX = 6;

export const STAGES = ["1 image adjustments", "2 trace", "3 features"] as const;

/**
 * Pure view-model for the trace-review screen: zoom/pan math, the
 * click-click-trace flow, overlay editing, and tool-mode transitions.
 * Rendering and DOM events live elsewhere; tests drive this directly
 * against a stubbed API port.
 */
export class TraceViewState {
  image: ImageInfo | null = null;
  zoom = 1;
  panX = 0; // screen position of image pixel (0, 0)
  panY = 0;
  mode: Mode = "autotrace";
  pendingStart: Pt | null = null;
  overlay: Pt[] = [];
  overlayMethod = "manual";
  tracing = false;
  status = STATUS_CLICK_START;
  dialog: string | null = null;
  stage = 1;
  lastFailureReasons: string[] = [];
  acceptedRevision: number | null = null;

  private requestCounter = 0;
  private inFlightRequest = 0;

  constructor(
    private readonly api: TracePort,
    private canvasWidth: number,
    private canvasHeight: number,
    private readonly onChange: () => void = () => {},
  ) {}

  // -- viewport ------------------------------------------------------------

  loadImage(info: ImageInfo): void {
    this.image = info;
    this.overlay = [];
    this.pendingStart = null;
    this.mode = "autotrace";
    this.stage = 1;
    this.dialog = null;
    this.acceptedRevision = null;
    this.fitToWindow();
    this.setStatus(STATUS_CLICK_START);
  }

  resizeCanvas(width: number, height: number): void {
    this.canvasWidth = width;
    this.canvasHeight = height;
    this.notify();
  }

  fitToWindow(): void {
    if (!this.image) return;
    this.zoom = Math.min(
      this.canvasWidth / this.image.width,
      this.canvasHeight / this.image.height,
    );
    this.panX = (this.canvasWidth - this.image.width * this.zoom) / 2;
    this.panY = (this.canvasHeight - this.image.height * this.zoom) / 2;
    this.notify();
  }

  zoomAt(screen: Pt, factor: number): void {
    const anchor = this.screenToImage(screen);
    this.zoom = Math.min(Math.max(this.zoom * factor, 0.05), 64);
    this.panX = screen.x - anchor.x * this.zoom;
    this.panY = screen.y - anchor.y * this.zoom;
    this.notify();
  }

  panBy(dx: number, dy: number): void {
    this.panX += dx;
    this.panY += dy;
    this.notify();
  }

  imageToScreen(p: Pt): Pt {
    return { x: this.panX + p.x * this.zoom, y: this.panY + p.y * this.zoom };
  }

  screenToImage(p: Pt): Pt {
    return { x: (p.x - this.panX) / this.zoom, y: (p.y - this.panY) / this.zoom };
  }

  /**
   * The visible region of the image in full-resolution pixel coordinates.
   * Sent with every trace request: the algorithm bounds its search to what
   * the user framed, so the whole fin must be in view.
   */
  visibleViewport(): ViewportRect {
    if (!this.image) return [0, 0, 0, 0];
    const tl = this.screenToImage({ x: 0, y: 0 });
    const br = this.screenToImage({ x: this.canvasWidth, y: this.canvasHeight });
    const x0 = Math.max(0, Math.floor(tl.x));
    const y0 = Math.max(0, Math.floor(tl.y));
    const x1 = Math.min(this.image.width, Math.ceil(br.x));
    const y1 = Math.min(this.image.height, Math.ceil(br.y));
    return [x0, y0, Math.max(0, x1 - x0), Math.max(0, y1 - y0)];
  }

  // -- click flow ----------------------------------------------------------

  setMode(mode: Mode): void {
    this.mode = mode;
    this.pendingStart = null; // a half-placed point pair never survives a tool change
    this.notify();
  }

  dismissDialog(): void {
    this.dialog = null;
    this.notify();
  }

  handleClick(screen: Pt): void {
    if (!this.image) return;
    const img = this.screenToImage(screen);
    const p: Pt = { x: Math.round(img.x), y: Math.round(img.y) };
    const inside =
      p.x >= 0 && p.y >= 0 && p.x < this.image.width && p.y < this.image.height;

    if (this.mode === "eraser") {
      if (inside) this.eraseAt(screen);
      return;
    }
    if (this.mode === "pencil") {
      if (inside) this.pencilAt(screen);
      return;
    }

    if (!inside) {
      this.setStatus(STATUS_OUTSIDE);
      return;
    }
    this.stage = 2;
    if (this.pendingStart === null) {
      this.pendingStart = p;
      this.setStatus(STATUS_CLICK_END);
      return;
    }
    const start = this.pendingStart;
    if (p.x <= start.x) {
      // misordered pair: guide and clear, ready for a fresh start click
      this.pendingStart = null;
      this.dialog = GUIDANCE_MISORDERED;
      this.setStatus(STATUS_CLICK_START);
      return;
    }
    this.pendingStart = null;
    void this.issueTrace(start, p);
  }

  private async issueTrace(start: Pt, end: Pt): Promise<void> {
    if (!this.image) return;
    const requestId = ++this.requestCounter;
    this.inFlightRequest = requestId;
    this.tracing = true;
    this.setStatus(STATUS_TRACING);
    let result: TraceResponse;
    try {
      result = await this.api.trace({
        image_id: this.image.id,
        start,
        end,
        viewport: this.visibleViewport(),
      });
    } catch (err) {
      if (requestId !== this.inFlightRequest) return; // superseded
      this.tracing = false;
      this.mode = "pencil";
      this.setStatus(`Trace request failed: ${(err as Error).message}. Draw the outline with the pencil.`);
      return;
    }
    if (requestId !== this.inFlightRequest) return; // a newer request won
    this.tracing = false;
    this.applyTraceResult(result);
  }

  applyTraceResult(result: TraceResponse): void {
    if (result.outcome === "success" && result.outline) {
      this.overlay = result.outline.points.map(([x, y]) => ({ x, y }));
      this.overlayMethod = result.outline.method;
      this.mode = "eraser"; // ready for light touch-ups
      this.setStatus(STATUS_ERASE);
      return;
    }
    this.lastFailureReasons = Object.values(result.diagnostics ?? {})
      .map((d) => d?.reason)
      .filter((r): r is string => typeof r === "string");
    this.overlay = [];
    this.overlayMethod = "manual";
    this.mode = "pencil"; // straight into manual tracing
    const reason = this.lastFailureReasons[this.lastFailureReasons.length - 1];
    this.setStatus(
      `No usable outline${reason ? ` (${reason})` : ""}. Trace the fin manually with the pencil.`,
    );
  }

  // -- overlay editing -----------------------------------------------------

  eraseAt(screen: Pt): void {
    const center = this.screenToImage(screen);
    const radius = ERASER_RADIUS_PX / this.zoom;
    const before = this.overlay.length;
    this.overlay = this.overlay.filter(
      (p) => Math.hypot(p.x - center.x, p.y - center.y) > radius,
    );
    if (this.overlay.length !== before) this.notify();
  }

  pencilAt(screen: Pt): void {
    const img = this.screenToImage(screen);
    const p: Pt = { x: Math.round(img.x), y: Math.round(img.y) };
    const last = this.overlay[this.overlay.length - 1];
    if (!last) {
      this.overlay.push(p);
    } else if (last.x !== p.x || last.y !== p.y) {
      this.overlay.push(...bridge4(last, p));
    }
    this.notify();
  }

  async accept(): Promise<number | null> {
    if (!this.image) return null;
    if (this.overlay.length < 2) {
      this.setStatus("An outline needs at least two points before it can be accepted.");
      return null;
    }
    const points = this.overlay.map((p) => [p.x, p.y] as [number, number]);
    const res = await this.api.acceptOutline(this.image.id, points, this.overlayMethod);
    this.acceptedRevision = res.revision;
    this.setStatus(`Outline accepted (revision ${res.revision}).`);
    return res.revision;
  }

  private setStatus(text: string): void {
    this.status = text;
    this.notify();
  }

  private notify(): void {
    this.onChange();
  }
}

/** 4-connected staircase from a to b, exclusive of a, inclusive of b. */
export function bridge4(a: Pt, b: Pt): Pt[] {
  const out: Pt[] = [];
  let { x, y } = a;
  const sx = b.x > x ? 1 : -1;
  const sy = b.y > y ? 1 : -1;
  const nx = Math.abs(b.x - x);
  const ny = Math.abs(b.y - y);
  let ix = 0;
  let iy = 0;
  while (ix < nx || iy < ny) {
    if ((2 * ix + 1) * ny <= (2 * iy + 1) * nx) {
      x += sx;
      ix += 1;
    } else {
      y += sy;
      iy += 1;
    }
    out.push({ x, y });
  }
  return out;
}
