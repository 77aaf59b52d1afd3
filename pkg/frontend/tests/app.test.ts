import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { App } from "../src/app.js";
import {
  EDGES,
  SESSION_ID,
  SUMMARY,
  graphResponse,
  mockServer,
  stepResponse,
} from "./fixtures.js";

function makeApp() {
  document.body.innerHTML = '<div id="root"></div>';
  return new App(document.getElementById("root") as HTMLElement, new ApiClient(""));
}

function graphHandler(url: string) {
  const match = url.match(/min_importance_percentile=(\d+(?:\.\d+)?)/);
  const percentile = match ? Number(match[1]) : 0;
  // recorded server behavior: the top ceil((100 - F)% * 10) edges
  const keep = Math.ceil(((100 - percentile) / 100) * EDGES.length);
  return graphResponse(keep);
}

describe("importance slider", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("renders exactly the server's filtered edge list at the 60th percentile", async () => {
    const calls = mockServer({
      [`GET /sessions/${SESSION_ID}`]: () => SUMMARY,
      [`GET /sessions/${SESSION_ID}/graph`]: graphHandler,
    });
    const app = makeApp();
    await app.attachSession(SESSION_ID);
    expect(document.querySelectorAll("line.edge")).toHaveLength(10);

    await app.setSlider(60);
    const rendered = [...document.querySelectorAll("line.edge")].map(
      (el) => el.getAttribute("data-edge"),
    );
    // bottom-importance 60% hidden: exactly the top four edges remain
    expect(rendered).toEqual(["0-1", "0-2", "0-3", "1-2"]);
    const graphCalls = calls.filter((c) => c.url.includes("/graph"));
    expect(graphCalls.at(-1)?.url).toContain("min_importance_percentile=60");
  });

  it("keeps visible edges equal to the server list after every change", async () => {
    mockServer({
      [`GET /sessions/${SESSION_ID}`]: () => SUMMARY,
      [`GET /sessions/${SESSION_ID}/graph`]: graphHandler,
    });
    const app = makeApp();
    await app.attachSession(SESSION_ID);
    for (const percentile of [20, 50, 90]) {
      await app.setSlider(percentile);
      const keep = Math.ceil(((100 - percentile) / 100) * EDGES.length);
      expect(app.store.state.visibleEdges).toHaveLength(keep);
      expect(document.querySelectorAll("line.edge")).toHaveLength(keep);
    }
  });
});

describe("manual selection mode", () => {
  it("posts exactly the selected edges on step", async () => {
    const calls = mockServer({
      [`GET /sessions/${SESSION_ID}`]: () => SUMMARY,
      [`GET /sessions/${SESSION_ID}/graph`]: graphHandler,
      [`POST /sessions/${SESSION_ID}/step`]: () => stepResponse(1),
    });
    const app = makeApp();
    await app.attachSession(SESSION_ID);
    app.modeToggle.click();
    expect(app.store.state.mode).toBe("manual");

    const lines = document.querySelectorAll<SVGLineElement>("line.edge");
    lines[1].dispatchEvent(new MouseEvent("click"));   // 0-2
    lines[3].dispatchEvent(new MouseEvent("click"));   // 1-2
    expect(app.store.state.selected.size).toBe(2);

    app.manualModeSelect.value = "remove";
    await app.step();
    const stepCall = calls.find((c) => c.url.endsWith("/step"));
    expect(stepCall?.body).toEqual({
      manual_edges: [
        [0, 2],
        [1, 2],
      ],
      mode: "remove",
    });
  });

  it("clicking an edge in policy mode never selects it", async () => {
    mockServer({
      [`GET /sessions/${SESSION_ID}`]: () => SUMMARY,
      [`GET /sessions/${SESSION_ID}/graph`]: graphHandler,
    });
    const app = makeApp();
    await app.attachSession(SESSION_ID);
    const line = document.querySelector<SVGLineElement>("line.edge");
    line?.dispatchEvent(new MouseEvent("click"));
    expect(app.store.state.selected.size).toBe(0);
  });

  it("leaving manual mode clears the pending selection", async () => {
    mockServer({
      [`GET /sessions/${SESSION_ID}`]: () => SUMMARY,
      [`GET /sessions/${SESSION_ID}/graph`]: graphHandler,
    });
    const app = makeApp();
    await app.attachSession(SESSION_ID);
    app.modeToggle.click();
    document
      .querySelectorAll<SVGLineElement>("line.edge")[0]
      .dispatchEvent(new MouseEvent("click"));
    expect(app.store.state.selected.size).toBe(1);
    app.modeToggle.click(); // back to policy mode
    expect(app.store.state.selected.size).toBe(0);
  });
});

describe("step and probability panel", () => {
  it("appends exactly one probability group per step", async () => {
    mockServer({
      [`GET /sessions/${SESSION_ID}`]: () => SUMMARY,
      [`GET /sessions/${SESSION_ID}/graph`]: graphHandler,
      [`POST /sessions/${SESSION_ID}/step`]: () =>
        stepResponse(document.querySelectorAll(".prob-group").length),
    });
    const app = makeApp();
    await app.attachSession(SESSION_ID);
    expect(document.querySelectorAll("[data-testid=prob-panel] .prob-group")).toHaveLength(1);
    await app.step();
    expect(document.querySelectorAll("[data-testid=prob-panel] .prob-group")).toHaveLength(2);
    await app.step();
    expect(document.querySelectorAll("[data-testid=prob-panel] .prob-group")).toHaveLength(3);
  });

  it("bar heights mirror the server probabilities", async () => {
    mockServer({
      [`GET /sessions/${SESSION_ID}`]: () => SUMMARY,
      [`GET /sessions/${SESSION_ID}/graph`]: graphHandler,
    });
    const app = makeApp();
    await app.attachSession(SESSION_ID);
    const bars = document.querySelectorAll<HTMLElement>(".prob-bar");
    expect(parseFloat(bars[0].style.height)).toBeCloseTo(70); // CIS 0.7
    expect(parseFloat(bars[1].style.height)).toBeCloseTo(10);
  });

  it("a FAIL verdict disables the controls and shows the abort badge", async () => {
    mockServer({
      [`GET /sessions/${SESSION_ID}`]: () => SUMMARY,
      [`GET /sessions/${SESSION_ID}/graph`]: graphHandler,
      [`POST /sessions/${SESSION_ID}/step`]: () => stepResponse(1, true),
    });
    const app = makeApp();
    await app.attachSession(SESSION_ID);
    await app.step();
    expect(app.store.state.outcome.kind).toBe("aborted");
    expect(app.stepButton.disabled).toBe(true);
    expect(app.runButton.disabled).toBe(true);
    const badge = document.querySelector("[data-testid=status]");
    expect(badge?.textContent).toContain("ABORTED");
    // further steps are ignored locally
    await app.step();
    expect(document.querySelectorAll("[data-testid=prob-panel] .prob-group")).toHaveLength(2);
  });

  it("shows a non-blocking banner on server errors", async () => {
    mockServer({
      [`GET /sessions/${SESSION_ID}`]: () => SUMMARY,
      [`GET /sessions/${SESSION_ID}/graph`]: graphHandler,
      // no step route: the mock answers 404 with a detail message
    });
    const app = makeApp();
    await app.attachSession(SESSION_ID);
    await app.step();
    expect(document.querySelectorAll(".banner")).toHaveLength(1);
    expect(app.stepButton.disabled).toBe(false); // still usable
  });
});
