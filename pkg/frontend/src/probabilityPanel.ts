/** Per-iteration probability bars: one group of four stage bars per record,
 * values straight from server responses. */

import { STAGE_COLORS } from "./color.js";
import type { StoreRecord } from "./types.js";
import { STAGES } from "./types.js";

export function renderProbabilityGroups(
  container: HTMLElement,
  records: Pick<StoreRecord, "index" | "probabilities">[],
): void {
  container.textContent = "";
  for (const record of records) {
    const group = document.createElement("div");
    group.className = "prob-group";
    group.dataset.iteration = String(record.index);
    const bars = document.createElement("div");
    bars.className = "prob-bars";
    for (const stage of STAGES) {
      const value = record.probabilities[stage];
      const bar = document.createElement("div");
      bar.className = "prob-bar";
      bar.dataset.stage = stage;
      bar.style.height = `${(value * 100).toFixed(1)}%`;
      bar.style.background = STAGE_COLORS[stage];
      bar.title = `${stage} ${(value * 100).toFixed(1)}%`;
      bars.appendChild(bar);
    }
    const label = document.createElement("div");
    label.className = "prob-label";
    label.textContent = `i=${record.index}`;
    group.appendChild(bars);
    group.appendChild(label);
    container.appendChild(group);
  }
}
