/** Typed client for the assembly-bench HTTP service.
 *
 * Every method maps one-to-one onto a service endpoint and resolves with the
 * parsed JSON payload. Non-2xx responses carry the service error envelope
 * {kind, message, detail} and are rethrown as ApiError; transport failures
 * become an ApiError with kind "Network" and status 0 so callers can offer
 * a retry.
 */

export interface AssetRecord {
  clip_id: string;
  caption: string;
  uri: string | null;
}

export interface SessionSource {
  dataset_id: string;
  sample_id: string;
}

export interface SessionPayload {
  session_id: string;
  collection: AssetRecord[];
  timeline: string[];
  history_length: number;
  source: SessionSource | null;
}

export interface SessionDetail extends SessionPayload {
  history: { instruction: string; timeline: string[] }[];
}

export type CuePayload =
  | { kind: "position"; index: number | "last" }
  | { kind: "id"; id: string }
  | { kind: "semantic"; description: string };

export type OpPayload =
  | { op: "insert"; element: CuePayload; at: CuePayload }
  | { op: "remove"; target: CuePayload }
  | { op: "replace"; target: CuePayload; replacement: CuePayload }
  | { op: "swap"; a: CuePayload; b: CuePayload };

export interface ExecutePayload {
  timeline: string[];
  ops: OpPayload[];
  /** Character ranges of the instruction text, one [start, end) per op. */
  spans: [number, number][];
  /** 1-based timeline positions whose occupant changed. */
  changed_positions: number[];
  history_length: number;
}

export interface UndoPayload {
  timeline: string[];
  history_length: number;
}

export interface GenerateOptions {
  collection_size?: number;
  timeline_length?: number | [number, number];
  samples_per_task?: number;
  seed?: number;
  compositional?: boolean;
  split?: string;
}

export interface DatasetSummary {
  total: number;
  counts: Record<string, number>;
  skipped: number;
  seed: number;
  split: string;
}

export interface SampleSummary {
  sample_id: string;
  task: string;
  cue: string;
  instruction: string;
  input_timeline: string[];
  output_timeline: string[];
  length: number;
}

export interface DatasetDetail {
  dataset_id: string;
  summary: DatasetSummary;
  samples: SampleSummary[];
}

export interface TemplateRecord {
  id: string;
  task: string;
  split: string;
  pattern: string;
}

export interface EvaluatePayload {
  report: {
    overall: number;
    per_cue: Record<string, number>;
    per_task: Record<string, number>;
    counts: Record<string, unknown>;
    failures: [string, string][];
  };
}

export class ApiError extends Error {
  constructor(
    readonly kind: string,
    message: string,
    readonly status: number,
    readonly detail: Record<string, unknown> = {},
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class AssemblyApi {
  constructor(
    readonly base: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.base + path, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError("Network", `cannot reach ${this.base}: ${String(err)}`, 0);
    }
    let payload: unknown = null;
    try {
      payload = await response.json();
    } catch {
      payload = null;
    }
    if (!response.ok) {
      const envelope = (payload ?? {}) as {
        kind?: string;
        message?: string;
        detail?: Record<string, unknown>;
      };
      throw new ApiError(
        envelope.kind ?? `Http${response.status}`,
        envelope.message ?? `${method} ${path} failed with status ${response.status}`,
        response.status,
        envelope.detail ?? {},
      );
    }
    return payload as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/health");
  }

  createSession(assets: AssetRecord[], timeline: string[]): Promise<SessionPayload> {
    return this.request("POST", "/sessions", { assets, timeline });
  }

  createSessionFromSample(datasetId: string, sampleId: string): Promise<SessionPayload> {
    return this.request("POST", "/sessions", { dataset_id: datasetId, sample_id: sampleId });
  }

  getSession(sessionId: string): Promise<SessionDetail> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  execute(sessionId: string, instruction: string): Promise<ExecutePayload> {
    return this.request("POST", `/sessions/${sessionId}/execute`, { instruction });
  }

  undo(sessionId: string): Promise<UndoPayload> {
    return this.request("POST", `/sessions/${sessionId}/undo`);
  }

  generate(options: GenerateOptions = {}): Promise<{ dataset_id: string; summary: DatasetSummary }> {
    return this.request("POST", "/generate", options);
  }

  listDatasets(): Promise<{ datasets: { dataset_id: string; summary: DatasetSummary }[] }> {
    return this.request("GET", "/datasets");
  }

  getDataset(datasetId: string): Promise<DatasetDetail> {
    return this.request("GET", `/datasets/${datasetId}`);
  }

  evaluate(
    datasetId: string,
    predictions: Record<string, string>,
    strictness?: string,
  ): Promise<EvaluatePayload> {
    const body: Record<string, unknown> = { dataset_id: datasetId, predictions };
    if (strictness !== undefined) {
      body["strictness"] = strictness;
    }
    return this.request("POST", "/evaluate", body);
  }

  listTemplates(): Promise<{ templates: TemplateRecord[] }> {
    return this.request("GET", "/templates");
  }
}

/** Service base URL: the ?api= query parameter wins, else the default port. */
export function apiBaseFromLocation(
  search: string,
  fallback = "http://127.0.0.1:8765",
): string {
  const base = new URLSearchParams(search).get("api") ?? fallback;
  return base.endsWith("/") ? base.slice(0, -1) : base;
}
