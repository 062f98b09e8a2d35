// Typed client for the assignment service's HTTP/JSON API.
// Every number shown in the UI originates from one of these responses.

export interface UploadSummary {
  id: string;
  parties: string[];
  total_voters: number;
  invalid_ballots: number;
  ballot_types: number;
}

export interface RoundRow {
  tally: number[];
  selected: string[];
  absorbed: number[];
  note: string;
}

export interface PerTypeRow {
  approvals: string[];
  count: number;
  portions: Record<string, number>;
}

export interface AssignmentTrace {
  parties: string[];
  assigned: number[];
  order: string[];
  rounds: RoundRow[];
  per_type: PerTypeRow[];
  diagnostics: string[];
  seed?: number;
  candidates?: Record<string, number>[];
}

export interface PendingTie {
  tied: string[];
  strategies: string[];
}

export interface SessionState {
  session: string;
  election: string;
  finished: boolean;
  order: string[];
  assigned: number[];
  tally: number[];
  rounds: RoundRow[];
  pending_tie: PendingTie | null;
}

export interface TallyResponse {
  parties: string[];
  tally: number[];
  removed: string[];
}

export type StepAction = { party: string } | { strategy: string } | Record<string, never>;

export class ApiError extends Error {
  constructor(
    public status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(public baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await fetch(this.baseUrl + path, init);
    const text = await res.text();
    if (!res.ok) {
      let detail = text;
      try {
        detail = String(JSON.parse(text).detail ?? text);
      } catch {
        // non-JSON error body, keep raw text
      }
      throw new ApiError(res.status, detail);
    }
    return JSON.parse(text) as T;
  }

  uploadElection(ballotFile: unknown): Promise<UploadSummary> {
    return this.request("POST", "/elections", ballotFile);
  }

  tally(electionId: string, removed: string[] = []): Promise<TallyResponse> {
    const q = removed.length ? `?removed=${encodeURIComponent(removed.join(","))}` : "";
    return this.request("GET", `/elections/${electionId}/tally${q}`);
  }

  assignByOrder(electionId: string, order: string[]): Promise<AssignmentTrace> {
    return this.request("POST", `/elections/${electionId}/assign`, { order });
  }

  assignPrefix(electionId: string, prefix: string[]): Promise<AssignmentTrace> {
    return this.request("POST", `/elections/${electionId}/assign`, { prefix });
  }

  createSession(electionId: string): Promise<SessionState> {
    return this.request("POST", `/elections/${electionId}/sessions`);
  }

  getSession(sessionId: string): Promise<SessionState> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  step(sessionId: string, action: StepAction = {}): Promise<SessionState> {
    return this.request("POST", `/sessions/${sessionId}/step`, action);
  }
}
