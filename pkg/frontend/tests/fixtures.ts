/** Recorded service responses (shapes captured from the live server) and a
 * tiny fetch mock that replays them. */

import type {
  GraphResponse,
  HistoryDocument,
  SessionSummary,
  StepResponse,
} from "../src/types.js";

export const SESSION_ID = "abc123";

/** 6 nodes, 10 edges; importance strictly decreasing along EDGES so the
 * server's top-40% filter keeps exactly the first four. */
export const EDGES: [number, number, number, number][] = [
  [0, 1, 90, 0.50],
  [0, 2, 80, 0.45],
  [0, 3, 70, 0.40],
  [1, 2, 60, 0.35],
  [1, 3, 50, 0.30],
  [2, 3, 40, 0.25],
  [4, 5, 30, 0.20],
  [0, 4, 20, 0.15],
  [1, 5, 15, 0.10],
  [2, 4, 10, 0.05],
];

export function graphResponse(keep: number): GraphResponse {
  return {
    nodes: [0, 1, 2, 3, 4, 5].map((id) => ({
      id,
      x: Math.cos((id / 6) * 2 * Math.PI),
      y: Math.sin((id / 6) * 2 * Math.PI),
    })),
    edges: EDGES.slice(0, keep).map(([x, y, weight, importance]) => ({
      x,
      y,
      weight,
      importance,
    })),
  };
}

export const SUMMARY: SessionSummary = {
  id: SESSION_ID,
  node_count: 6,
  active_edges: 10,
  iterations: 1,
  probabilities: { CIS: 0.7, RR: 0.1, PP: 0.1, SP: 0.1 },
  predicted: "CIS",
  outcome: { kind: "running", abort_index: null, reason: null },
};

export function stepResponse(index: number, fail = false): StepResponse {
  return {
    record: {
      index,
      probabilities: fail
        ? { CIS: 0.8, RR: 0.1, PP: 0.05, SP: 0.05 }
        : { CIS: 0.6, RR: 0.2, PP: 0.1, SP: 0.1 },
      predicted: fail ? "CIS" : "CIS",
      selection: [
        [0, 1],
        [1, 2],
      ],
      modified_edge_count: 2,
      verdict: fail
        ? { tag: "FAIL", severe: true, removed_edge_count: 120 }
        : { tag: "OK", severe: false, removed_edge_count: 0 },
    },
    outcome: fail
      ? { kind: "aborted", abort_index: index, reason: "checker-fail" }
      : { kind: "running", abort_index: null, reason: null },
  };
}

export function historyDocument(recordCount: number): HistoryDocument {
  const q = 4;
  return {
    format: "connectosim-history",
    schema_version: 1,
    outcome: { kind: "completed", abort_index: null, reason: null },
    config: { percent: 50, seed: 1 },
    records: Array.from({ length: recordCount }, (_, index) => ({
      index,
      probabilities: {
        CIS: 0.7 - 0.08 * index,
        RR: 0.1 + 0.05 * index,
        PP: 0.1 + 0.02 * index,
        SP: 0.1 + 0.01 * index,
      },
      selection: index === 0 ? [] : [[0, 1]],
      modified_edge_count: index === 0 ? 0 : 1,
      verdict: { tag: "OK" as const },
      adjacency: Array.from({ length: q }, (_, i) =>
        Array.from({ length: q }, (_, j) =>
          i === j ? 0 : Math.max(60 - 10 * index - 5 * Math.abs(i - j), 0),
        ),
      ),
    })),
  };
}

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

/** Installs a fetch mock; handlers keyed by "METHOD path" prefixes. */
export function mockServer(
  handlers: Record<string, (url: string, body: unknown) => unknown>,
): RecordedCall[] {
  const calls: RecordedCall[] = [];
  const fetchMock = async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    calls.push({ url, method, body });
    for (const [key, handler] of Object.entries(handlers)) {
      const [wantMethod, prefix] = key.split(" ", 2);
      if (method === wantMethod && url.split("?")[0] === prefix) {
        const result = handler(url, body);
        return new Response(JSON.stringify(result), {
          status: 200,
          headers: { "Content-Type": "application/json" },
        });
      }
    }
    return new Response(JSON.stringify({ detail: `no route ${method} ${url}` }), {
      status: 404,
      headers: { "Content-Type": "application/json" },
    });
  };
  globalThis.fetch = fetchMock as typeof fetch;
  return calls;
}
