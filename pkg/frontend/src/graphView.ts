/** SVG graph rendering: nodes at server-provided layout coordinates, edges
 * colored by weight, wheel zoom and drag pan via the viewBox, edge clicks
 * forwarded for manual selection. The view renders exactly what the store
 * holds and never mutates it directly.
 */

import { weightColor } from "./color.js";
import type { Store } from "./state.js";
import { edgeKey } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export class GraphView {
  private svg: SVGSVGElement;
  private viewBox = { x: -1.2, y: -1.2, w: 2.4, h: 2.4 };
  private panning: { startX: number; startY: number } | null = null;

  constructor(
    private container: HTMLElement,
    private store: Store,
    private onEdgeClick: (x: number, y: number) => void,
  ) {
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("class", "graph-view");
    this.svg.setAttribute("data-testid", "graph-svg");
    this.applyViewBox();
    this.container.appendChild(this.svg);
    this.svg.addEventListener("wheel", (ev) => this.onWheel(ev as WheelEvent));
    this.svg.addEventListener("mousedown", (ev) => this.beginPan(ev as MouseEvent));
    this.svg.addEventListener("mousemove", (ev) => this.movePan(ev as MouseEvent));
    this.svg.addEventListener("mouseup", () => (this.panning = null));
    this.svg.addEventListener("mouseleave", () => (this.panning = null));
  }

  render(): void {
    const { nodes, visibleEdges, selected, mode } = this.store.state;
    this.svg.textContent = "";
    const coords = new Map(nodes.map((n) => [n.id, n]));
    for (const edge of visibleEdges) {
      const a = coords.get(edge.x);
      const b = coords.get(edge.y);
      if (!a || !b) continue;
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(a.x));
      line.setAttribute("y1", String(a.y));
      line.setAttribute("x2", String(b.x));
      line.setAttribute("y2", String(b.y));
      line.setAttribute("stroke", weightColor(edge.weight));
      line.setAttribute("stroke-width", "0.008");
      const key = edgeKey(edge.x, edge.y);
      line.setAttribute("class", selected.has(key) ? "edge selected" : "edge");
      line.setAttribute("data-edge", key);
      if (mode === "manual") {
        line.addEventListener("click", () => this.onEdgeClick(edge.x, edge.y));
      }
      this.svg.appendChild(line);
    }
    for (const node of nodes) {
      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", String(node.x));
      circle.setAttribute("cy", String(node.y));
      circle.setAttribute("r", "0.015");
      circle.setAttribute("class", "node");
      circle.setAttribute("data-node", String(node.id));
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent = `node ${node.id}`;
      circle.appendChild(title);
      this.svg.appendChild(circle);
    }
  }

  private applyViewBox(): void {
    const { x, y, w, h } = this.viewBox;
    this.svg.setAttribute("viewBox", `${x} ${y} ${w} ${h}`);
  }

  private onWheel(ev: WheelEvent): void {
    ev.preventDefault();
    const factor = ev.deltaY > 0 ? 1.15 : 1 / 1.15;
    const { x, y, w, h } = this.viewBox;
    const cx = x + w / 2;
    const cy = y + h / 2;
    this.viewBox = {
      x: cx - (w * factor) / 2,
      y: cy - (h * factor) / 2,
      w: w * factor,
      h: h * factor,
    };
    this.applyViewBox();
  }

  private beginPan(ev: MouseEvent): void {
    this.panning = { startX: ev.clientX, startY: ev.clientY };
  }

  private movePan(ev: MouseEvent): void {
    if (!this.panning) return;
    const rect = this.svg.getBoundingClientRect();
    const scale = this.viewBox.w / Math.max(rect.width, 1);
    this.viewBox.x -= (ev.clientX - this.panning.startX) * scale;
    this.viewBox.y -= (ev.clientY - this.panning.startY) * scale;
    this.panning = { startX: ev.clientX, startY: ev.clientY };
    this.applyViewBox();
  }
}
