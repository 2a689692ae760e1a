/** Typed client for the engine's HTTP API under /api/v1. */

export interface HealthResponse {
  status: string;
  nodes: number;
  edges: number;
  version: string;
}

export interface UseCase {
  uuid: string;
  description: string;
}

export interface Insight {
  uuid: string;
  kind: string;
  date: string;
  severity: number;
  description: string;
  refers_to: string[];
}

export interface Option {
  option_uuid: string;
  description: string;
  accepted: number;
  rejected: number;
  score: number;
  creative: boolean;
}

export interface Forecast {
  uuid: string;
  model_uuid: string;
  kind: string;
  properties: Record<string, unknown>;
}

export interface FeedbackRequest {
  insight_uuid: string;
  verdict: "accepted" | "rejected" | "alternative";
  user: string;
  option_uuid?: string;
  alternative_text?: string;
}

export interface FeedbackResponse {
  feedback_uuid: string;
  option_uuid: string;
  verdict: string;
}

export interface ScopeMetrics {
  scope: string;
  n_nodes: number;
  n_relationships: number;
  mpl: number;
  tpl: number;
  apl: number;
  sample_fraction: number;
  seed: number;
}

export interface MetricsResponse {
  scopes: ScopeMetrics[];
  csv: string;
}

/** Error raised for non-2xx responses, carrying the engine's error code. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/v1${path}`, init);
    if (!response.ok) {
      let code = "http.error";
      let message = `HTTP ${response.status}`;
      try {
        const body = await response.json();
        const detail = body?.detail ?? body;
        if (detail?.code) code = detail.code;
        if (detail?.message) message = detail.message;
      } catch {
        // non-JSON error body; keep the defaults
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  health(): Promise<HealthResponse> {
    return this.request("/health");
  }

  useCases(): Promise<UseCase[]> {
    return this.request("/usecases");
  }

  insights(since?: string): Promise<Insight[]> {
    const query = since ? `?since=${encodeURIComponent(since)}` : "";
    return this.request(`/insights${query}`);
  }

  options(insightUuid: string): Promise<Option[]> {
    return this.request(`/insights/${encodeURIComponent(insightUuid)}/options`);
  }

  forecasts(useCase?: string): Promise<Forecast[]> {
    const query = useCase ? `?use_case=${encodeURIComponent(useCase)}` : "";
    return this.request(`/forecasts${query}`);
  }

  sendFeedback(body: FeedbackRequest): Promise<FeedbackResponse> {
    return this.post("/feedback", body);
  }

  metrics(sampleFraction = 1.0): Promise<MetricsResponse> {
    return this.request(`/metrics?sample_fraction=${sampleFraction}`);
  }
}
