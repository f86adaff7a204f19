/** Typed client for the planning service. JSON in, JSON out, nothing cached. */

export type Cell = [number, number];

export type Layer = "demand" | "coverage" | "connectivity" | "cost" | "comprehensive";

export const LAYERS: readonly Layer[] = [
  "demand",
  "coverage",
  "connectivity",
  "cost",
  "comprehensive",
];

export interface Recommendation {
  cell: Cell;
  score: number;
  features: number[];
}

export interface SessionState {
  id: string;
  version: number;
  weights: number[];
  budget: { used: number; total: number };
  grid: { rows: number; cols: number; cell_size: number };
  plan: { cells: [number, number, number][] };
  recommendations: Recommendation[];
}

export interface LayerGrid {
  layer: Layer;
  version: number;
  rows: number;
  cols: number;
  values: number[];
}

export interface JobSubmission {
  job: string;
  status: string;
}

export interface JobStatus {
  job: string;
  status: "queued" | "running" | "done" | "failed";
  loss_history?: [number, number][];
  plan?: { layout: number[][] };
  error?: string;
}

export interface OptimizeRequest {
  iterations?: number;
  algorithm?: string;
  target_sites?: number;
  over_cluster?: number;
  seed?: number;
}

/** Server-reported failure carrying the {code, message, detail} envelope. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
    public readonly detail: unknown = null,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** Transport failure: the request never produced a server response. */
export class NetworkError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "NetworkError";
  }
}

export class PlannerApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, {
        headers: { "Content-Type": "application/json" },
        ...init,
      });
    } catch (err) {
      throw new NetworkError(err instanceof Error ? err.message : String(err));
    }
    if (!response.ok) {
      const body = await response.json().catch(() => null);
      throw new ApiError(
        response.status,
        typeof body?.code === "string" ? body.code : "unknown_error",
        typeof body?.message === "string" ? body.message : `HTTP ${response.status}`,
        body?.detail ?? null,
      );
    }
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("/health");
  }

  createSession(weights?: number[], topK?: number): Promise<SessionState> {
    const body: Record<string, unknown> = {};
    if (weights !== undefined) body.weights = weights;
    if (topK !== undefined) body.top_k = topK;
    return this.request("/sessions", { method: "POST", body: JSON.stringify(body) });
  }

  getSession(id: string): Promise<SessionState> {
    return this.request(`/sessions/${id}`);
  }

  fetchLayer(id: string, layer: Layer): Promise<LayerGrid> {
    return this.request(`/sessions/${id}/scores?layer=${encodeURIComponent(layer)}`);
  }

  select(id: string, cell: Cell): Promise<SessionState> {
    return this.request(`/sessions/${id}/select`, {
      method: "POST",
      body: JSON.stringify({ cell }),
    });
  }

  setWeights(id: string, weights: number[]): Promise<SessionState> {
    return this.request(`/sessions/${id}/weights`, {
      method: "PUT",
      body: JSON.stringify({ weights }),
    });
  }

  submitOptimize(request: OptimizeRequest): Promise<JobSubmission> {
    return this.request("/optimize", { method: "POST", body: JSON.stringify(request) });
  }

  jobStatus(job: string): Promise<JobStatus> {
    return this.request(`/optimize/${job}`);
  }
}
