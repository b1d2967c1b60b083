/** DOM wiring: controls on the left, scatter in the middle, history below. */

import { ClusterConfig, DEFAULT_CONFIG, TuningApi } from "./api.js";
import { drawScatter } from "./scatter.js";
import { TuningStore, UiState } from "./state.js";

const SERVICE_URL =
  new URLSearchParams(location.search).get("service") ?? "http://127.0.0.1:8237";

const api = new TuningApi(SERVICE_URL);
const store = new TuningStore(api);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const canvas = el<HTMLCanvasElement>("scatter");
const staleBadge = el<HTMLSpanElement>("stale-badge");
const ariBadge = el<HTMLSpanElement>("ari-badge");
const summary = el<HTMLSpanElement>("summary");
const historyBody = el<HTMLTableSectionElement>("history-body");
const errorBox = el<HTMLDivElement>("global-error");

const NUMERIC_FIELDS: (keyof ClusterConfig)[] = [
  "expansion", "blur", "max_neighbors", "min_cluster_size", "tau", "seed",
];
const SELECT_FIELDS: (keyof ClusterConfig)[] = [
  "level", "policy", "heuristics", "seeding", "index",
];

function readConfig(): ClusterConfig {
  const config = { ...DEFAULT_CONFIG };
  for (const field of NUMERIC_FIELDS) {
    const input = el<HTMLInputElement>(`cfg-${field}`);
    (config as Record<string, unknown>)[field] = Number(input.value);
  }
  for (const field of SELECT_FIELDS) {
    const select = el<HTMLSelectElement>(`cfg-${field}`);
    const raw = select.value;
    (config as Record<string, unknown>)[field] = field === "level" ? Number(raw) : raw;
  }
  return config;
}

function writeConfig(config: ClusterConfig): void {
  for (const field of NUMERIC_FIELDS) {
    el<HTMLInputElement>(`cfg-${field}`).value = String(config[field]);
  }
  for (const field of SELECT_FIELDS) {
    el<HTMLSelectElement>(`cfg-${field}`).value = String(config[field]);
  }
  el<HTMLSpanElement>("cfg-expansion-value").textContent =
    Number(config.expansion).toFixed(2);
  el<HTMLSpanElement>("cfg-blur-value").textContent = Number(config.blur).toFixed(2);
}

function clearFieldErrors(): void {
  document.querySelectorAll(".field-error").forEach((node) => {
    node.textContent = "";
  });
  errorBox.textContent = "";
}

function render(state: UiState): void {
  staleBadge.hidden = !(state.stale || state.busy);
  clearFieldErrors();
  if (state.error) {
    const slot = state.error.field
      ? document.getElementById(`err-${state.error.field}`)
      : null;
    (slot ?? errorBox).textContent = state.error.message;
  }

  if (state.points) {
    const labels = state.lastResult ? displayLabels(state) : state.points.truth;
    drawScatter(canvas, state.points.x, state.points.y, labels);
  }

  if (state.lastResult) {
    const r = state.lastResult;
    summary.textContent =
      `${r.n_clusters} clusters, ${r.n_noise} noise, ${r.runtime_s.toFixed(3)}s`;
    ariBadge.hidden = r.ari === null;
    if (r.ari !== null) ariBadge.textContent = `ARI ${r.ari.toFixed(3)}`;
  } else if (state.dataset) {
    summary.textContent =
      `${state.dataset.name}: ${state.dataset.n} points, ${state.dataset.d}d` +
      (state.points && state.points.truth ? " (showing truth)" : "");
    ariBadge.hidden = true;
  }

  historyBody.innerHTML = "";
  for (const entry of [...state.history].reverse()) {
    const row = document.createElement("tr");
    if (entry.duplicate) row.classList.add("duplicate");
    row.innerHTML =
      `<td>${entry.seq}${entry.duplicate ? " (dup)" : ""}</td>` +
      `<td>L${entry.config.level}</td>` +
      `<td>${entry.config.expansion.toFixed(2)}</td>` +
      `<td>${entry.config.blur.toFixed(2)}</td>` +
      `<td>${entry.config.max_neighbors}</td>` +
      `<td>${entry.config.min_cluster_size}</td>` +
      `<td>${entry.config.policy}</td>` +
      `<td>${entry.n_clusters}</td>` +
      `<td>${entry.ari === null ? "-" : entry.ari.toFixed(3)}</td>`;
    row.addEventListener("click", () => {
      writeConfig(entry.config);
      void store.apply(entry.config);
    });
    historyBody.appendChild(row);
  }

  const dimsReady = state.dataset && state.dataset.d > 1;
  el<HTMLInputElement>("dim-x").max = String((state.dataset?.d ?? 1) - 1);
  el<HTMLInputElement>("dim-y").max = String((state.dataset?.d ?? 1) - 1);
  el<HTMLInputElement>("dim-x").disabled = !dimsReady;
  el<HTMLInputElement>("dim-y").disabled = !dimsReady;
}

function displayLabels(state: UiState): number[] | null {
  // the service downsamples display points for big datasets; labels come
  // back for every row, so map them through the displayed row indices
  const result = state.lastResult;
  const points = state.points;
  if (!result || !points) return null;
  if (points.displayed === result.labels.length) return result.labels;
  return points.indices.map((row) => result.labels[row] ?? -1);
}

function wireControls(): void {
  for (const field of [...NUMERIC_FIELDS, ...SELECT_FIELDS]) {
    const node = el<HTMLInputElement | HTMLSelectElement>(`cfg-${field}`);
    node.addEventListener("change", () => {
      writeConfig(readConfig());
      void store.apply(readConfig());
    });
  }
  el<HTMLInputElement>("cfg-expansion").addEventListener("input", () =>
    writeConfig(readConfig()),
  );
  el<HTMLInputElement>("cfg-blur").addEventListener("input", () => writeConfig(readConfig()));

  el<HTMLButtonElement>("apply").addEventListener("click", () => {
    void store.apply(readConfig());
  });

  el<HTMLButtonElement>("load-generator").addEventListener("click", () => {
    const kind = el<HTMLSelectElement>("gen-kind").value;
    const n = Number(el<HTMLInputElement>("gen-n").value);
    const seed = Number(el<HTMLInputElement>("gen-seed").value);
    store.loadGenerated(kind, n, seed).catch((err) => {
      errorBox.textContent = String(err.message ?? err);
    });
  });

  el<HTMLInputElement>("csv-file").addEventListener("change", async (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    const text = await file.text();
    const label = el<HTMLInputElement>("csv-label").value.trim() || undefined;
    store.loadCsv(text, label, file.name.replace(/\.csv$/, "")).catch((err) => {
      errorBox.textContent = String(err.message ?? err);
    });
  });

  const dimHandler = () => {
    void store.selectDims(
      Number(el<HTMLInputElement>("dim-x").value),
      Number(el<HTMLInputElement>("dim-y").value),
    );
  };
  el<HTMLInputElement>("dim-x").addEventListener("change", dimHandler);
  el<HTMLInputElement>("dim-y").addEventListener("change", dimHandler);

  el<HTMLButtonElement>("export-history").addEventListener("click", () => {
    const blob = new Blob([store.exportHistory()], { type: "application/jsonl" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "tuning_history.jsonl";
    a.click();
    URL.revokeObjectURL(a.href);
  });
}

async function boot(): Promise<void> {
  writeConfig(DEFAULT_CONFIG);
  wireControls();
  store.subscribe(render);
  if (!(await api.health())) {
    errorBox.textContent =
      `service not reachable at ${SERVICE_URL} — start it with: evoclust serve`;
  }
}

void boot();
