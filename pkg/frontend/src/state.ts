/** Single mutable view state with change notification.
 *
 * Visible edges are always exactly the server's filtered edge list for the
 * current slider value; the store never derives or filters edges itself.
 */

import type {
  GraphEdge,
  GraphNode,
  OutcomePayload,
  StoreRecord,
} from "./types.js";
import { edgeKey } from "./types.js";

export type Mode = "policy" | "manual";

export interface ViewState {
  sessionId: string | null;
  nodes: GraphNode[];
  visibleEdges: GraphEdge[];
  sliderPercentile: number;
  selected: Set<string>;
  records: StoreRecord[];
  outcome: OutcomePayload;
  mode: Mode;
  busy: boolean;
}

export function initialState(): ViewState {
  return {
    sessionId: null,
    nodes: [],
    visibleEdges: [],
    sliderPercentile: 0,
    selected: new Set(),
    records: [],
    outcome: { kind: "running", abort_index: null, reason: null },
    mode: "policy",
    busy: false,
  };
}

export class Store {
  private listeners: Array<(s: ViewState) => void> = [];
  state: ViewState = initialState();

  subscribe(listener: (s: ViewState) => void): void {
    this.listeners.push(listener);
  }

  update(patch: Partial<ViewState>): void {
    Object.assign(this.state, patch);
    for (const listener of this.listeners) listener(this.state);
  }

  /** Replace the rendered graph with the server's list and drop any
   * selections that are no longer visible. */
  setGraph(nodes: GraphNode[], edges: GraphEdge[]): void {
    const visible = new Set(edges.map((e) => edgeKey(e.x, e.y)));
    const selected = new Set(
      [...this.state.selected].filter((key) => visible.has(key)),
    );
    this.update({ nodes, visibleEdges: edges, selected });
  }

  toggleSelected(x: number, y: number): void {
    if (this.state.mode !== "manual") return;
    const key = edgeKey(x, y);
    const visible = this.state.visibleEdges.some(
      (e) => edgeKey(e.x, e.y) === key,
    );
    if (!visible) return;
    const selected = new Set(this.state.selected);
    if (selected.has(key)) {
      selected.delete(key);
    } else {
      selected.add(key);
    }
    this.update({ selected });
  }

  selectedPairs(): [number, number][] {
    return [...this.state.selected]
      .map((key) => key.split("-").map(Number) as [number, number])
      .sort((a, b) => a[0] - b[0] || a[1] - b[1]);
  }

  get ended(): boolean {
    return this.state.outcome.kind === "aborted" || this.state.outcome.kind === "completed";
  }
}
