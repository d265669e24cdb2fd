export interface Pt {
  x: number;
  y: number;
}

export interface ImageInfo {
  id: string;
  width: number;
  height: number;
}

/** [x, y, w, h] in full-resolution image pixels. */
export type ViewportRect = [number, number, number, number];

export interface TraceRequestBody {
  image_id: string;
  start: Pt;
  end: Pt;
  viewport: ViewportRect;
  tier?: string;
}

export interface OutlinePayload {
  method: string;
  threshold: number;
  scale: number;
  closed_form: boolean;
  points: [number, number][];
}

export interface TraceResponse {
  outcome: "success" | "failure";
  method: string | null;
  threshold: number | null;
  outline: OutlinePayload | null;
  diagnostics: Record<string, { reason?: string; status?: string } & Record<string, unknown>>;
}

export interface AcceptResponse {
  image_id: string;
  revision: number;
  point_count: number;
}

/** The slice of the HTTP API the view state consumes; stubbed in tests. */
export interface TracePort {
  trace(body: TraceRequestBody): Promise<TraceResponse>;
  acceptOutline(imageId: string, points: [number, number][], method: string): Promise<AcceptResponse>;
}

export type Mode = "autotrace" | "eraser" | "pencil";
