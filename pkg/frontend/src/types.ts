/** JSON contracts of the session service, mirrored verbatim. */

export type StageName = "CIS" | "RR" | "PP" | "SP";

export const STAGES: StageName[] = ["CIS", "RR", "PP", "SP"];

export interface GraphNode {
  id: number;
  x: number;
  y: number;
}

export interface GraphEdge {
  x: number;
  y: number;
  weight: number;
  importance: number | null;
}

export interface GraphResponse {
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export interface VerdictPayload {
  tag: "OK" | "FAIL";
  severe: boolean | null;
  removed_edge_count: number | null;
}

export interface RecordPayload {
  index: number;
  probabilities: Record<StageName, number>;
  predicted: StageName;
  selection: [number, number][];
  modified_edge_count: number;
  verdict: VerdictPayload;
}

export interface OutcomePayload {
  kind: "running" | "completed" | "aborted" | "error";
  abort_index: number | null;
  reason: string | null;
}

export interface SessionSummary {
  id: string;
  node_count: number;
  active_edges: number;
  iterations: number;
  probabilities: Record<StageName, number>;
  predicted: StageName;
  outcome: OutcomePayload;
}

export interface StepResponse {
  record: RecordPayload;
  outcome: OutcomePayload;
}

export interface HistoryRecord {
  index: number;
  probabilities: Record<StageName, number>;
  selection: [number, number][];
  modified_edge_count: number;
  verdict: { tag: "OK" | "FAIL" };
  adjacency: number[][];
}

export interface HistoryDocument {
  format: string;
  schema_version: number;
  outcome: { kind: string; abort_index: number | null; reason: string | null };
  config: Record<string, unknown>;
  records: HistoryRecord[];
}

/** The slice of a record the view stores and renders. */
export interface StoreRecord {
  index: number;
  probabilities: Record<StageName, number>;
  selection: [number, number][];
  modified_edge_count: number;
  verdict: { tag: "OK" | "FAIL" };
}

export interface PolicyDescriptor {
  kind: "structural" | "metric";
  [key: string]: unknown;
}

export type StepBody =
  | { policy: PolicyDescriptor }
  | { manual_edges: [number, number][]; mode: "degrade" | "remove" };

export function edgeKey(x: number, y: number): string {
  return x < y ? `${x}-${y}` : `${y}-${x}`;
}
