/** UI state machine for the tuning loop.
 *
 * Invariants the view relies on:
 *  - `lastResult` always corresponds to `appliedConfig`; while a request is
 *    in flight the previous result stays on screen flagged stale.
 *  - at most one cluster request is in flight; edits made meanwhile collapse
 *    into a single pending request (latest wins).
 *  - history is append-only, capped, and exportable; re-submitting a config
 *    already in history marks the new row as a duplicate.
 */

import {
  ApiError,
  ClusterConfig,
  ClusterResponse,
  DatasetCreated,
  DEFAULT_CONFIG,
  PointsResponse,
  TuningApi,
} from "./api.js";

export const HISTORY_CAP = 100;

export interface HistoryEntry {
  seq: number;
  config: ClusterConfig;
  ari: number | null;
  n_clusters: number;
  n_noise: number;
  runtime_s: number;
  duplicate: boolean;
}

export interface InlineError {
  field: string | null;
  message: string;
}

export interface UiState {
  dataset: DatasetCreated | null;
  dims: [number, number];
  points: PointsResponse | null;
  draftConfig: ClusterConfig;
  appliedConfig: ClusterConfig | null;
  lastResult: ClusterResponse | null;
  stale: boolean;
  busy: boolean;
  error: InlineError | null;
  history: HistoryEntry[];
}

export function configsEqual(a: ClusterConfig, b: ClusterConfig): boolean {
  return (Object.keys(DEFAULT_CONFIG) as (keyof ClusterConfig)[]).every(
    (key) => a[key] === b[key],
  );
}

type Listener = (state: UiState) => void;

export class TuningStore {
  readonly state: UiState = {
    dataset: null,
    dims: [0, 1],
    points: null,
    draftConfig: { ...DEFAULT_CONFIG },
    appliedConfig: null,
    lastResult: null,
    stale: false,
    busy: false,
    error: null,
    history: [],
  };

  private listeners: Listener[] = [];
  private pending: ClusterConfig | null = null;
  private seq = 0;

  constructor(private api: TuningApi) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  async loadGenerated(kind: string, nPoints: number, seed: number): Promise<void> {
    const dataset = await this.api.createFromGenerator({ kind, n_points: nPoints, seed });
    await this.attach(dataset);
  }

  async loadCsv(csv: string, labelColumn?: string, name?: string): Promise<void> {
    const dataset = await this.api.createFromCsv(csv, labelColumn, name);
    await this.attach(dataset);
  }

  private async attach(dataset: DatasetCreated): Promise<void> {
    this.state.dataset = dataset;
    this.state.dims = [0, dataset.d > 1 ? 1 : 0];
    this.state.lastResult = null;
    this.state.appliedConfig = null;
    this.state.history = [];
    this.state.error = null;
    this.state.points = await this.api.points(dataset.id, this.state.dims);
    this.emit();
  }

  async selectDims(i: number, j: number): Promise<void> {
    if (!this.state.dataset) return;
    this.state.dims = [i, j];
    this.state.points = await this.api.points(this.state.dataset.id, [i, j]);
    this.emit();
  }

  setDraft<K extends keyof ClusterConfig>(key: K, value: ClusterConfig[K]): void {
    this.state.draftConfig = { ...this.state.draftConfig, [key]: value };
    this.emit();
  }

  /** Fire (or queue) a clustering request for the given config. */
  async apply(config: ClusterConfig = this.state.draftConfig): Promise<void> {
    if (!this.state.dataset) {
      this.state.error = { field: null, message: "load a dataset first" };
      this.emit();
      return;
    }
    this.state.draftConfig = { ...config };
    if (this.state.busy) {
      this.pending = { ...config }; // latest wins
      this.state.stale = true;
      this.emit();
      return;
    }
    await this.run({ ...config });
  }

  private async run(config: ClusterConfig): Promise<void> {
    const dataset = this.state.dataset!;
    this.state.busy = true;
    this.state.stale = this.state.lastResult !== null;
    this.state.error = null;
    this.emit();
    try {
      const result = await this.api.cluster(dataset.id, config);
      const duplicate = this.state.history.some((h) => configsEqual(h.config, config));
      this.state.history.push({
        seq: ++this.seq,
        config,
        ari: result.ari,
        n_clusters: result.n_clusters,
        n_noise: result.n_noise,
        runtime_s: result.runtime_s,
        duplicate,
      });
      if (this.state.history.length > HISTORY_CAP) {
        this.state.history = this.state.history.slice(-HISTORY_CAP);
      }
      this.state.lastResult = result;
      this.state.appliedConfig = config;
    } catch (err) {
      if (err instanceof ApiError) {
        this.state.error = { field: err.field, message: err.message };
      } else {
        this.state.error = { field: null, message: String(err) };
      }
    } finally {
      this.state.busy = false;
      const queued = this.pending;
      this.pending = null;
      if (queued) {
        await this.run(queued);
        return;
      }
      this.state.stale = false;
      this.emit();
    }
  }

  /** History as JSON, shaped like the harness trial logs for comparison. */
  exportHistory(): string {
    const rows = this.state.history.map((h, i) => ({
      schema_version: 1,
      trial: i + 1,
      config: h.config,
      ari: h.ari,
      nmi: null,
      runtime_s: h.runtime_s,
      n_clusters: h.n_clusters,
      duplicate: h.duplicate,
    }));
    return rows.map((r) => JSON.stringify(r)).join("\n");
  }
}
