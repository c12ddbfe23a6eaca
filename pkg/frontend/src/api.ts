import type {
  AgreementReport,
  ConflictEntry,
  JudgmentBody,
  Label,
  MetricsReport,
  NextPayload,
  SessionStatus,
  Verdict,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchFn = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client over the review service; a fetch implementation is
 * injected so tests can run against a stubbed service. */
export class ReviewApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchFn = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl.replace(/\/$/, "") + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
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

  sessionStatus(sessionId: string): Promise<SessionStatus> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}`);
  }

  next(sessionId: string, rater: string): Promise<NextPayload> {
    return this.request(
      `/sessions/${encodeURIComponent(sessionId)}/next?rater=${encodeURIComponent(rater)}`,
    );
  }

  submitJudgment(sessionId: string, judgment: JudgmentBody): Promise<{ stored: boolean }> {
    return this.post(`/sessions/${encodeURIComponent(sessionId)}/judgments`, judgment);
  }

  agreement(sessionId: string): Promise<AgreementReport> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/agreement`);
  }

  conflicts(sessionId: string): Promise<{ conflicts: ConflictEntry[] }> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/conflicts`);
  }

  resolve(
    sessionId: string,
    pairId: string,
    verdict: Verdict,
    labels: Label[] = [],
    note = "",
  ): Promise<{ stored: boolean }> {
    return this.post(`/sessions/${encodeURIComponent(sessionId)}/resolutions`, {
      pair_id: pairId,
      verdict,
      labels,
      note,
    });
  }

  metricsReport(sessionId: string): Promise<MetricsReport> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/reports/metrics`);
  }
}
