/** Application shell: control toolbar, graph panel, probability panel,
 * history page, error banners. All domain results come from the service;
 * the shell only forwards user intent and renders responses.
 *
 * One mutating request is in flight per session at most: controls disable
 * while busy, and an ended (aborted) session disables everything except
 * history and reset.
 */

import { ApiClient, ApiError } from "./api.js";
import { GraphView } from "./graphView.js";
import { renderHistory } from "./historyView.js";
import { renderProbabilityGroups } from "./probabilityPanel.js";
import { Store } from "./state.js";
import type { PolicyDescriptor, StepResponse } from "./types.js";

const POLICIES: Record<string, PolicyDescriptor> = {
  clique: { kind: "structural", criterion: "clique" },
  "independent-set": { kind: "structural", criterion: "independent-set" },
  "max-degree": { kind: "structural", criterion: "max-degree" },
  mvc: { kind: "structural", criterion: "mvc" },
  "density-decrease": {
    kind: "metric",
    metric: "density",
    direction: "decrease",
    relative_change: 0.1,
  },
  "assortativity-increase": {
    kind: "metric",
    metric: "assortativity",
    direction: "increase",
    relative_change: 0.1,
  },
};

export class App {
  store = new Store();
  graphView: GraphView;

  readonly sliderInput: HTMLInputElement;
  readonly sliderValue: HTMLSpanElement;
  readonly modeToggle: HTMLInputElement;
  readonly manualModeSelect: HTMLSelectElement;
  readonly policySelect: HTMLSelectElement;
  readonly stepButton: HTMLButtonElement;
  readonly runButton: HTMLButtonElement;
  readonly runCount: HTMLInputElement;
  readonly resetButton: HTMLButtonElement;
  readonly historyButton: HTMLButtonElement;
  readonly statusBadge: HTMLSpanElement;
  readonly bannerArea: HTMLElement;
  readonly probPanel: HTMLElement;
  readonly historyPanel: HTMLElement;
  readonly selectionInfo: HTMLSpanElement;

  constructor(private root: HTMLElement, private api: ApiClient) {
    root.innerHTML = `
      <div class="toolbar">
        <label>policy
          <select data-testid="policy-select"></select>
        </label>
        <button data-testid="step">step</button>
        <input data-testid="run-count" type="number" value="4" min="1" size="3" />
        <button data-testid="run">run</button>
        <button data-testid="reset">reset</button>
        <button data-testid="history">history</button>
        <label class="mode-label">
          <input type="checkbox" data-testid="mode-toggle" /> manual selection
        </label>
        <select data-testid="manual-mode">
          <option value="degrade">degrade</option>
          <option value="remove">remove</option>
        </select>
        <span data-testid="selection-info" class="selection-info"></span>
        <label>importance &ge;
          <input data-testid="slider" type="range" min="0" max="100" step="5" value="0" />
          <span data-testid="slider-value">0</span>th pct
        </label>
        <span data-testid="status" class="status-badge"></span>
      </div>
      <div class="banner-area" data-testid="banners"></div>
      <div class="main-panels">
        <div class="graph-panel" data-testid="graph-panel"></div>
        <div class="prob-panel" data-testid="prob-panel"></div>
      </div>
      <div class="history-panel" data-testid="history-panel"></div>
    `;
    this.sliderInput = this.query("slider");
    this.sliderValue = this.query("slider-value");
    this.modeToggle = this.query("mode-toggle");
    this.manualModeSelect = this.query("manual-mode");
    this.policySelect = this.query("policy-select");
    this.stepButton = this.query("step");
    this.runButton = this.query("run");
    this.runCount = this.query("run-count");
    this.resetButton = this.query("reset");
    this.historyButton = this.query("history");
    this.statusBadge = this.query("status");
    this.bannerArea = this.query("banners");
    this.probPanel = this.query("prob-panel");
    this.historyPanel = this.query("history-panel");
    this.selectionInfo = this.query("selection-info");

    for (const name of Object.keys(POLICIES)) {
      const option = document.createElement("option");
      option.value = name;
      option.textContent = name;
      this.policySelect.appendChild(option);
    }

    this.graphView = new GraphView(
      this.query("graph-panel"),
      this.store,
      (x, y) => {
        this.store.toggleSelected(x, y);
      },
    );

    this.sliderInput.addEventListener("change", () => {
      void this.setSlider(Number(this.sliderInput.value));
    });
    this.modeToggle.addEventListener("change", () => this.toggleMode());
    this.stepButton.addEventListener("click", () => void this.step());
    this.runButton.addEventListener("click", () =>
      void this.runIterations(Number(this.runCount.value)),
    );
    this.resetButton.addEventListener("click", () => void this.reset());
    this.historyButton.addEventListener("click", () => void this.showHistory());

    this.store.subscribe(() => this.render());
    this.render();
  }

  private query<T extends HTMLElement>(testId: string): T {
    const el = this.root.querySelector(`[data-testid="${testId}"]`);
    if (!el) throw new Error(`missing element ${testId}`);
    return el as T;
  }

  async attachSession(sessionId: string): Promise<void> {
    this.store.update({ sessionId });
    const summary = await this.api.summary(sessionId);
    this.store.update({
      outcome: summary.outcome,
      records: [
        {
          index: 0,
          probabilities: summary.probabilities,
          selection: [],
          modified_edge_count: 0,
          verdict: { tag: "OK" },
        },
      ],
    });
    await this.refreshGraph();
  }

  async refreshGraph(): Promise<void> {
    const { sessionId, sliderPercentile } = this.store.state;
    if (!sessionId) return;
    try {
      const graph = await this.api.graph(sessionId, sliderPercentile);
      this.store.setGraph(graph.nodes, graph.edges);
    } catch (err) {
      this.banner(err);
    }
  }

  async setSlider(percentile: number): Promise<void> {
    this.store.update({ sliderPercentile: percentile });
    await this.refreshGraph();
  }

  toggleMode(): void {
    const mode = this.store.state.mode === "policy" ? "manual" : "policy";
    // leaving manual mode discards the pending selection so an accidental
    // click can never leak into a policy-driven step
    this.store.update({ mode, selected: new Set() });
  }

  private async mutate<T>(work: () => Promise<T>): Promise<T | undefined> {
    if (this.store.state.busy || !this.store.state.sessionId) return undefined;
    this.store.update({ busy: true });
    try {
      return await work();
    } catch (err) {
      this.banner(err);
      return undefined;
    } finally {
      this.store.update({ busy: false });
    }
  }

  async step(): Promise<void> {
    if (this.store.ended) return;
    const sessionId = this.store.state.sessionId;
    if (!sessionId) return;
    await this.mutate(async () => {
      const body =
        this.store.state.mode === "manual"
          ? {
              manual_edges: this.store.selectedPairs(),
              mode: this.manualModeSelect.value as "degrade" | "remove",
            }
          : { policy: POLICIES[this.policySelect.value] };
      const response = await this.api.step(sessionId, body);
      this.applyStep(response);
      await this.refreshGraph();
    });
  }

  private applyStep(response: StepResponse): void {
    const r = response.record;
    this.store.update({
      records: [
        ...this.store.state.records,
        {
          index: r.index,
          probabilities: r.probabilities,
          selection: r.selection,
          modified_edge_count: r.modified_edge_count,
          verdict: { tag: r.verdict.tag },
        },
      ],
      outcome: response.outcome,
      selected: new Set(),
    });
  }

  async runIterations(n: number): Promise<void> {
    if (this.store.ended) return;
    const sessionId = this.store.state.sessionId;
    if (!sessionId) return;
    await this.mutate(async () => {
      const history = await this.api.run(sessionId, {
        policy: POLICIES[this.policySelect.value],
        exit: { kind: "max-iterations", n },
      });
      const summary = await this.api.summary(sessionId);
      this.store.update({
        records: history.records.map((r) => ({
          index: r.index,
          probabilities: r.probabilities,
          selection: r.selection,
          modified_edge_count: r.modified_edge_count,
          verdict: { tag: r.verdict.tag },
        })),
        outcome: summary.outcome,
      });
      await this.refreshGraph();
    });
  }

  async reset(): Promise<void> {
    const sessionId = this.store.state.sessionId;
    if (!sessionId) return;
    await this.mutate(async () => {
      await this.api.reset(sessionId);
      await this.attachSession(sessionId);
    });
  }

  async showHistory(): Promise<void> {
    const sessionId = this.store.state.sessionId;
    if (!sessionId) return;
    try {
      const doc = await this.api.history(sessionId);
      renderHistory(this.historyPanel, doc);
    } catch (err) {
      this.banner(err);
    }
  }

  banner(err: unknown): void {
    const div = document.createElement("div");
    div.className = "banner";
    div.textContent =
      err instanceof ApiError
        ? `server: ${err.message}`
        : `error: ${String(err)}`;
    const close = document.createElement("button");
    close.textContent = "x";
    close.addEventListener("click", () => div.remove());
    div.appendChild(close);
    this.bannerArea.appendChild(div);
  }

  render(): void {
    const { outcome, busy, mode, records, selected } = this.store.state;
    const ended = this.store.ended;
    const controlsDisabled = busy || ended;
    this.stepButton.disabled = controlsDisabled;
    this.runButton.disabled = controlsDisabled || mode === "manual";
    this.policySelect.disabled = controlsDisabled || mode === "manual";
    this.resetButton.disabled = busy;
    this.historyButton.disabled = busy;
    this.manualModeSelect.disabled = controlsDisabled || mode === "policy";
    this.sliderValue.textContent = String(this.store.state.sliderPercentile);
    this.selectionInfo.textContent =
      mode === "manual" ? `${selected.size} edge(s) selected` : "";
    if (outcome.kind === "aborted") {
      this.statusBadge.textContent = `ABORTED at i=${outcome.abort_index} (${outcome.reason ?? ""})`;
      this.statusBadge.className = "status-badge aborted";
    } else if (outcome.kind === "completed") {
      this.statusBadge.textContent = "completed";
      this.statusBadge.className = "status-badge completed";
    } else {
      this.statusBadge.textContent = "";
      this.statusBadge.className = "status-badge";
    }
    renderProbabilityGroups(this.probPanel, records);
    this.graphView.render();
  }
}
