/**
 * Typed client for the single-session review API.
 *
 * Every mutation goes through the two POST endpoints; reads return the
 * server's immutable snapshots. The client computes nothing itself, so the
 * panel always displays server numbers verbatim.
 */

export interface SessionParams {
  alpha: number;
  top_docs: number;
  top_terms: number;
}

export interface SessionInfo {
  schema_version: number;
  session_id: string;
  status: "awaiting_iteration" | "awaiting_decisions" | "converged";
  iteration: number;
  query: string[];
  seed_query: string[];
  relevant: string[];
  previous_relevant: string[] | null;
  params: SessionParams;
  index_fingerprint: string;
  zero_signal: boolean;
}

export interface RankingRow {
  document: string;
  score: number;
  total_words: number;
}

export interface RankingPayload {
  iteration: number;
  ranking: RankingRow[];
}

export interface Candidate {
  term: string;
  score: number;
}

export interface CandidatesPayload {
  iteration: number;
  status: string;
  candidates: Candidate[];
  decided: boolean;
}

export interface HistoryRecord {
  iteration: number;
  timestamp: string;
  zero_signal: boolean;
  ranking: RankingRow[];
  candidates: Candidate[];
  decisions: Record<string, string> | null;
  decided_by: string | null;
}

export interface HistoryPayload {
  history: HistoryRecord[];
}

export interface IteratePayload {
  status: string;
  iteration: number;
  ranking: RankingRow[];
  candidates: Candidate[];
  zero_signal: boolean;
}

/** Non-2xx response, with the server's JSON error body when there is one. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly payload: unknown,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

function errorMessage(status: number, payload: unknown): string {
  if (
    payload !== null &&
    typeof payload === "object" &&
    typeof (payload as { error?: unknown }).error === "string"
  ) {
    return (payload as { error: string }).error;
  }
  return `request failed with status ${status}`;
}

export class SessionApi {
  constructor(readonly base: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.base + path, init);
    let payload: unknown = null;
    try {
      payload = await response.json();
    } catch {
      payload = null;
    }
    if (!response.ok) {
      throw new ApiError(
        response.status,
        payload,
        errorMessage(response.status, payload),
      );
    }
    return payload as T;
  }

  session(): Promise<SessionInfo> {
    return this.request<SessionInfo>("/api/session");
  }

  ranking(): Promise<RankingPayload> {
    return this.request<RankingPayload>("/api/session/ranking");
  }

  candidates(): Promise<CandidatesPayload> {
    return this.request<CandidatesPayload>("/api/session/candidates");
  }

  history(): Promise<HistoryPayload> {
    return this.request<HistoryPayload>("/api/session/history");
  }

  submitDecisions(
    decisions: Record<string, string>,
    decidedBy: string = "web",
  ): Promise<SessionInfo> {
    return this.request<SessionInfo>("/api/session/decisions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ decisions, decided_by: decidedBy }),
    });
  }

  iterate(): Promise<IteratePayload> {
    return this.request<IteratePayload>("/api/session/iterate", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({}),
    });
  }
}
