import type {
  AnalysisResult,
  ApiErrorBody,
  HealthResponse,
  IngestResponse,
  Policy,
  SaliencyResponse,
} from "./types";

/** A failed API call, carrying the server's error envelope. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly stage: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface ClientConfig {
  /** Service origin, e.g. "http://localhost:8000". Empty means same-origin. */
  baseUrl: string;
  /** Injectable for tests; defaults to the global fetch. */
  fetchImpl?: FetchLike;
}

/** Thin typed client for the claimlens service. */
export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;

  constructor(config: ClientConfig) {
    this.baseUrl = config.baseUrl.replace(/\/+$/, "");
    this.fetchImpl = config.fetchImpl ?? ((input, init) => fetch(input, init));
  }

  ingest(text: string): Promise<IngestResponse> {
    return this.request("POST", "/v1/documents", { text });
  }

  analyze(docId: string, targetIndex: number, policy: Policy): Promise<AnalysisResult> {
    return this.request("POST", `/v1/documents/${docId}/analyze`, {
      target_index: targetIndex,
      policy,
    });
  }

  refilter(docId: string, policy: Policy, targetIndex?: number): Promise<AnalysisResult> {
    const body: Record<string, unknown> = { policy };
    if (targetIndex !== undefined) {
      body.target_index = targetIndex;
    }
    return this.request("POST", `/v1/documents/${docId}/refilter`, body);
  }

  saliency(docId: string): Promise<SaliencyResponse> {
    return this.request("GET", `/v1/documents/${docId}/saliency`);
  }

  health(): Promise<HealthResponse> {
    return this.request("GET", "/v1/health");
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    let payload: unknown = null;
    try {
      payload = await response.json();
    } catch {
      payload = null;
    }
    if (!response.ok) {
      const detail = (payload as ApiErrorBody | null)?.error ?? {
        code: "TransportError",
        stage: "service",
        message: `HTTP ${response.status}`,
      };
      throw new ApiError(response.status, detail.code, detail.stage, detail.message);
    }
    return payload as T;
  }
}
