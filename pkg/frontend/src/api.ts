/** Thin typed client for the service API. Every call returns the parsed
 * payload together with the exact raw body text, so callers can keep (and
 * later compare) the byte-level payload they rendered. */

import type {
  ApiErrorBody,
  CubeResponse,
  HealthResponse,
  LevelSpec,
  MineResponse,
  SearchResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface Raw<T> {
  payload: T;
  raw: string;
}

export class ServiceError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly opIndex?: number,
    readonly status?: number,
  ) {
    super(message);
  }
}

/** Network-level failure (service down / unreachable). */
export class ServiceDownError extends Error {}

export interface MineRequest {
  query: string | null;
  params: { min_support?: number; max_events?: number; [key: string]: unknown };
  top_n?: number;
}

export interface PipelineRequest extends MineRequest {
  levels: LevelSpec;
  pipeline: string;
}

export class ServiceClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<Raw<T>> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (cause) {
      throw new ServiceDownError(`service unreachable at ${this.baseUrl}`);
    }
    const raw = await response.text();
    if (!response.ok) {
      let body: ApiErrorBody | null = null;
      try {
        body = JSON.parse(raw) as ApiErrorBody;
      } catch {
        // non-JSON error body; fall through to a generic error
      }
      if (body?.error) {
        throw new ServiceError(body.error.code, body.error.message, body.error.op_index, response.status);
      }
      throw new ServiceError("http_error", `HTTP ${response.status}`, undefined, response.status);
    }
    return { payload: JSON.parse(raw) as T, raw };
  }

  health(): Promise<Raw<HealthResponse>> {
    return this.request<HealthResponse>("/health");
  }

  search(query: string, topN = 10): Promise<Raw<SearchResponse>> {
    const params = new URLSearchParams({ q: query, n: String(topN) });
    return this.request<SearchResponse>(`/search?${params.toString()}`);
  }

  mine(body: MineRequest): Promise<Raw<MineResponse>> {
    return this.request<MineResponse>("/events/mine", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  cubePipeline(body: PipelineRequest): Promise<Raw<CubeResponse>> {
    return this.request<CubeResponse>("/cube/pipeline", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }
}
