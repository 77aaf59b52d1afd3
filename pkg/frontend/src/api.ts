/** Thin fetch client for the session service; no domain logic. */

import type {
  GraphResponse,
  HistoryDocument,
  SessionSummary,
  StepBody,
  StepResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!resp.ok) {
    let detail = `${resp.status} ${resp.statusText}`;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      /* keep the status line */
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  constructor(private base: string = "") {}

  listModels(): Promise<{ models: string[] }> {
    return request(`${this.base}/models`);
  }

  uploadConnectome(body: { matrix?: number[][]; facts?: string }): Promise<{
    id: string;
    node_count: number;
    active_edges: number;
  }> {
    return request(`${this.base}/connectomes`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  createSession(body: {
    connectome_id: string;
    model_id: string;
    seed: number;
    p?: number;
    checker_threshold?: number;
  }): Promise<{ id: string; record: unknown; outcome: unknown }> {
    return request(`${this.base}/sessions`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  summary(sessionId: string): Promise<SessionSummary> {
    return request(`${this.base}/sessions/${sessionId}`);
  }

  graph(sessionId: string, minImportancePercentile?: number): Promise<GraphResponse> {
    const query =
      minImportancePercentile === undefined
        ? ""
        : `?min_importance_percentile=${minImportancePercentile}`;
    return request(`${this.base}/sessions/${sessionId}/graph${query}`);
  }

  step(sessionId: string, body: StepBody): Promise<StepResponse> {
    return request(`${this.base}/sessions/${sessionId}/step`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  run(
    sessionId: string,
    body: { policy: unknown; exit: { kind: string; n?: number } },
  ): Promise<HistoryDocument> {
    return request(`${this.base}/sessions/${sessionId}/run`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  history(sessionId: string): Promise<HistoryDocument> {
    return request(`${this.base}/sessions/${sessionId}/history`);
  }

  reset(sessionId: string): Promise<{ iterations: number; outcome: unknown }> {
    return request(`${this.base}/sessions/${sessionId}/reset`, { method: "POST" });
  }
}
