/** Bootstrap: connectome upload + session creation form, then the app. */

import { ApiClient } from "./api.js";
import { App } from "./app.js";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found as T;
}

async function boot(): Promise<void> {
  const api = new ApiClient("");
  const app = new App(el("app"), api);
  const form = el<HTMLFormElement>("session-form");
  const matrixInput = el<HTMLTextAreaElement>("matrix-input");
  const fileInput = el<HTMLInputElement>("matrix-file");
  const modelSelect = el<HTMLSelectElement>("model-select");
  const seedInput = el<HTMLInputElement>("seed-input");
  const percentInput = el<HTMLInputElement>("percent-input");
  const formError = el<HTMLSpanElement>("form-error");

  try {
    const { models } = await api.listModels();
    for (const id of models) {
      const option = document.createElement("option");
      option.value = id;
      option.textContent = id;
      modelSelect.appendChild(option);
    }
  } catch (err) {
    formError.textContent = `cannot list models: ${String(err)}`;
  }

  fileInput.addEventListener("change", async () => {
    const file = fileInput.files?.[0];
    if (file) matrixInput.value = await file.text();
  });

  form.addEventListener("submit", async (ev) => {
    ev.preventDefault();
    formError.textContent = "";
    try {
      const text = matrixInput.value.trim();
      if (!text) throw new Error("paste or choose a matrix first");
      const body = text.startsWith("node(")
        ? { facts: text }
        : {
            matrix: text
              .split("\n")
              .map((row) => row.trim().split(/[\s,]+/).map(Number)),
          };
      const uploaded = await api.uploadConnectome(body);
      const session = await api.createSession({
        connectome_id: uploaded.id,
        model_id: modelSelect.value,
        seed: Number(seedInput.value),
        p: Number(percentInput.value),
      });
      await app.attachSession(session.id);
      el("setup").classList.add("collapsed");
    } catch (err) {
      formError.textContent = String(err instanceof Error ? err.message : err);
    }
  });
}

void boot();
