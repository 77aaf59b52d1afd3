/** History page: per-stage boxplots of all recorded probabilities, the
 * iteration table, and one adjacency heat map per record. All numbers come
 * from the exported history document; the boxplot only orders and picks
 * quantile positions of the server's values for display. */

import { STAGE_COLORS, heatColor } from "./color.js";
import { renderProbabilityGroups } from "./probabilityPanel.js";
import type { HistoryDocument, StageName } from "./types.js";
import { STAGES } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

interface BoxStats {
  min: number;
  q1: number;
  median: number;
  q3: number;
  max: number;
}

export function boxStats(values: number[]): BoxStats {
  const sorted = [...values].sort((a, b) => a - b);
  const at = (fraction: number): number => {
    const pos = fraction * (sorted.length - 1);
    const lo = Math.floor(pos);
    const hi = Math.ceil(pos);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo);
  };
  return {
    min: sorted[0],
    q1: at(0.25),
    median: at(0.5),
    q3: at(0.75),
    max: sorted[sorted.length - 1],
  };
}

function renderBoxplots(container: HTMLElement, history: HistoryDocument): void {
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", "0 0 440 160");
  svg.setAttribute("class", "boxplots");
  svg.setAttribute("data-testid", "boxplots");
  STAGES.forEach((stage: StageName, i) => {
    const values = history.records.map((r) => r.probabilities[stage]);
    if (values.length === 0) return;
    const stats = boxStats(values);
    const cx = 60 + i * 110;
    const yOf = (p: number) => 140 - p * 120;
    const box = document.createElementNS(SVG_NS, "g");
    box.setAttribute("class", "boxplot");
    box.setAttribute("data-stage", stage);
    const parts = [
      line(cx, yOf(stats.min), cx, yOf(stats.q1)),
      line(cx, yOf(stats.q3), cx, yOf(stats.max)),
      rect(cx - 22, yOf(stats.q3), 44, Math.max(yOf(stats.q1) - yOf(stats.q3), 0.5), STAGE_COLORS[stage]),
      line(cx - 22, yOf(stats.median), cx + 22, yOf(stats.median)),
      line(cx - 12, yOf(stats.min), cx + 12, yOf(stats.min)),
      line(cx - 12, yOf(stats.max), cx + 12, yOf(stats.max)),
    ];
    for (const part of parts) box.appendChild(part);
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(cx));
    label.setAttribute("y", "156");
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("class", "box-label");
    label.textContent = stage;
    box.appendChild(label);
    svg.appendChild(box);
  });
  container.appendChild(svg);
}

function line(x1: number, y1: number, x2: number, y2: number): SVGElement {
  const el = document.createElementNS(SVG_NS, "line");
  el.setAttribute("x1", String(x1));
  el.setAttribute("y1", String(y1));
  el.setAttribute("x2", String(x2));
  el.setAttribute("y2", String(y2));
  el.setAttribute("stroke", "#333");
  return el;
}

function rect(x: number, y: number, w: number, h: number, fill: string): SVGElement {
  const el = document.createElementNS(SVG_NS, "rect");
  el.setAttribute("x", String(x));
  el.setAttribute("y", String(y));
  el.setAttribute("width", String(w));
  el.setAttribute("height", String(h));
  el.setAttribute("fill", fill);
  el.setAttribute("fill-opacity", "0.6");
  el.setAttribute("stroke", "#333");
  return el;
}

function renderIterationTable(container: HTMLElement, history: HistoryDocument): void {
  const table = document.createElement("table");
  table.className = "iteration-table";
  const head = document.createElement("tr");
  for (const column of ["i", ...STAGES, "modified", "verdict"]) {
    const th = document.createElement("th");
    th.textContent = column;
    head.appendChild(th);
  }
  table.appendChild(head);
  for (const record of history.records) {
    const row = document.createElement("tr");
    const cells = [
      String(record.index),
      ...STAGES.map((s) => record.probabilities[s].toFixed(3)),
      String(record.modified_edge_count),
      record.verdict.tag,
    ];
    for (const value of cells) {
      const td = document.createElement("td");
      td.textContent = value;
      row.appendChild(td);
    }
    table.appendChild(row);
  }
  container.appendChild(table);
}

function renderHeatmaps(container: HTMLElement, history: HistoryDocument): void {
  const strip = document.createElement("div");
  strip.className = "heatmap-strip";
  for (const record of history.records) {
    const wrapper = document.createElement("figure");
    wrapper.className = "heatmap-figure";
    const canvas = document.createElement("canvas");
    const q = record.adjacency.length;
    canvas.width = q;
    canvas.height = q;
    canvas.className = "heatmap";
    canvas.dataset.iteration = String(record.index);
    const ctx = canvas.getContext("2d");
    if (ctx) {
      for (let i = 0; i < q; i++) {
        for (let j = 0; j < q; j++) {
          ctx.fillStyle = heatColor(record.adjacency[i][j]);
          ctx.fillRect(j, i, 1, 1);
        }
      }
    }
    const caption = document.createElement("figcaption");
    caption.textContent = `i=${record.index}`;
    wrapper.appendChild(canvas);
    wrapper.appendChild(caption);
    strip.appendChild(wrapper);
  }
  container.appendChild(strip);
}

export function renderHistory(container: HTMLElement, history: HistoryDocument): void {
  container.textContent = "";
  const heading = document.createElement("h2");
  heading.textContent = `History — ${history.outcome.kind}`;
  container.appendChild(heading);
  renderBoxplots(container, history);
  const groups = document.createElement("div");
  groups.className = "history-prob-groups";
  container.appendChild(groups);
  renderProbabilityGroups(
    groups,
    history.records.map((r) => ({ index: r.index, probabilities: r.probabilities })),
  );
  renderIterationTable(container, history);
  renderHeatmaps(container, history);
}
