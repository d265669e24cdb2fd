import type {
  AcceptResponse,
  ImageInfo,
  TracePort,
  TraceRequestBody,
  TraceResponse,
} from "./types.js";

/** Raised for HTTP 422: semantically invalid endpoints (misordered clicks). */
export class EndpointOrderError extends Error {}

export class ApiClient implements TracePort {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  imageUrl(id: string): string {
    return `${this.baseUrl}/api/images/${encodeURIComponent(id)}`;
  }

  async listImages(): Promise<ImageInfo[]> {
    const res = await this.fetchFn(`${this.baseUrl}/api/images`);
    if (!res.ok) throw new Error(`image listing failed: ${res.status}`);
    return (await res.json()) as ImageInfo[];
  }

  async trace(body: TraceRequestBody): Promise<TraceResponse> {
    const res = await this.fetchFn(`${this.baseUrl}/api/trace`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (res.status === 422) {
      const payload = (await res.json()) as { detail?: string };
      throw new EndpointOrderError(payload.detail ?? "invalid endpoints");
    }
    if (!res.ok) throw new Error(`trace failed: ${res.status}`);
    return (await res.json()) as TraceResponse;
  }

  async acceptOutline(
    imageId: string,
    points: [number, number][],
    method: string,
  ): Promise<AcceptResponse> {
    const res = await this.fetchFn(
      `${this.baseUrl}/api/outlines/${encodeURIComponent(imageId)}/accept`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ points, method }),
      },
    );
    if (!res.ok) throw new Error(`accept failed: ${res.status}`);
    return (await res.json()) as AcceptResponse;
  }
}
