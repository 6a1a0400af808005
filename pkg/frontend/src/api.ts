/** Typed client for the review service. The console performs no
 * adjudication locally: every state change round-trips through here. */

import type {
  ConsensusDoc,
  LogDoc,
  ProblemDetail,
  QueueEntry,
  QueueResponse,
  ReviewDecision,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly problem: ProblemDetail | null,
  ) {
    super(problem ? `${problem.code}: ${problem.detail}` : `HTTP ${status}`);
  }

  get code(): string {
    return this.problem?.code ?? "http-error";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface QueueFilters {
  kind?: string;
  status?: string;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ApiError(0, {
        type: "about:blank",
        title: "network error",
        status: 0,
        code: "network-error",
        detail: String(err),
      });
    }
    if (!response.ok) {
      let problem: ProblemDetail | null = null;
      try {
        problem = (await response.json()) as ProblemDetail;
      } catch {
        problem = null;
      }
      throw new ApiError(response.status, problem);
    }
    return (await response.json()) as T;
  }

  async health(): Promise<{ status: string; version: string }> {
    return this.request("/healthz");
  }

  async fetchQueue(filters: QueueFilters = {}): Promise<QueueEntry[]> {
    const params = new URLSearchParams();
    if (filters.kind) params.set("kind", filters.kind);
    if (filters.status) params.set("status", filters.status);
    const q = params.toString();
    const body = await this.request<QueueResponse>(`/review/queue${q ? `?${q}` : ""}`);
    return body.entries;
  }

  async submitDecision(
    entryId: string,
    decision: ReviewDecision,
    idempotencyKey?: string,
  ): Promise<QueueEntry> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (idempotencyKey) headers["Idempotency-Key"] = idempotencyKey;
    return this.request<QueueEntry>(`/review/${entryId}`, {
      method: "POST",
      headers,
      body: JSON.stringify(decision),
    });
  }

  async fetchLog(taskId: string): Promise<LogDoc> {
    return this.request<LogDoc>(`/tasks/${taskId}/log`);
  }

  async fetchAudit(taskId: string): Promise<ConsensusDoc> {
    return this.request<ConsensusDoc>(`/tasks/${taskId}/audit`);
  }
}
