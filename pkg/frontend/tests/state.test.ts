import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiError, DEFAULT_CONFIG, TuningApi } from "../src/api.js";
import { configsEqual, HISTORY_CAP, TuningStore } from "../src/state.js";

type Deferred = {
  promise: Promise<Response>;
  resolve: (r: Response) => void;
};

function deferred(): Deferred {
  let resolve!: (r: Response) => void;
  const promise = new Promise<Response>((r) => (resolve = r));
  return { promise, resolve };
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

const DATASET = { id: "ds-0001", name: "circles", n: 12, d: 2, has_truth: true };
const POINTS = {
  id: "ds-0001",
  dims: [0, 1],
  x: [0, 1],
  y: [0, 1],
  truth: [0, 1],
  indices: [0, 1],
  n_total: 12,
  displayed: 2,
};

function clusterBody(config: Record<string, unknown>, nClusters = 2, ari: number | null = 1.0) {
  return {
    id: "ds-0001",
    labels: [0, 1],
    n_clusters: nClusters,
    n_noise: 0,
    cluster_sizes: [1, 1],
    runtime_s: 0.01,
    ari,
    nmi: ari,
    config,
  };
}

describe("TuningStore", () => {
  let requests: { url: string; body: unknown; deferred: Deferred }[];
  let store: TuningStore;

  beforeEach(() => {
    requests = [];
    vi.stubGlobal("fetch", (url: string, init?: RequestInit) => {
      if (url.endsWith("/datasets") && init?.method === "POST") {
        return Promise.resolve(jsonResponse(DATASET, 201));
      }
      if (url.includes("/points")) {
        return Promise.resolve(jsonResponse(POINTS));
      }
      const d = deferred();
      requests.push({ url, body: JSON.parse(String(init?.body ?? "{}")), deferred: d });
      return d.promise;
    });
    store = new TuningStore(new TuningApi("http://test"));
  });

  afterEach(() => vi.unstubAllGlobals());

  it("loads a generated dataset and resets state", async () => {
    await store.loadGenerated("circles", 12, 0);
    expect(store.state.dataset?.id).toBe("ds-0001");
    expect(store.state.dims).toEqual([0, 1]);
    expect(store.state.points?.truth).toEqual([0, 1]);
    expect(store.state.history).toHaveLength(0);
  });

  it("apply fires a request and appends history", async () => {
    await store.loadGenerated("circles", 12, 0);
    const done = store.apply({ ...DEFAULT_CONFIG, expansion: 0.7 });
    expect(store.state.busy).toBe(true);
    requests[0]!.deferred.resolve(jsonResponse(clusterBody({ expansion: 0.7 })));
    await done;
    expect(store.state.history).toHaveLength(1);
    expect(store.state.history[0]!.config.expansion).toBe(0.7);
    expect(store.state.lastResult?.n_clusters).toBe(2);
    expect(store.state.appliedConfig?.expansion).toBe(0.7);
    expect(store.state.busy).toBe(false);
    expect(store.state.stale).toBe(false);
  });

  it("flags the displayed result stale while a newer request runs", async () => {
    await store.loadGenerated("circles", 12, 0);
    const first = store.apply(DEFAULT_CONFIG);
    requests[0]!.deferred.resolve(jsonResponse(clusterBody({})));
    await first;
    expect(store.state.stale).toBe(false);
    const second = store.apply({ ...DEFAULT_CONFIG, blur: 0.9 });
    expect(store.state.stale).toBe(true);
    requests[1]!.deferred.resolve(jsonResponse(clusterBody({ blur: 0.9 })));
    await second;
    expect(store.state.stale).toBe(false);
  });

  it("collapses edits during flight into one pending request, latest wins", async () => {
    await store.loadGenerated("circles", 12, 0);
    const first = store.apply({ ...DEFAULT_CONFIG, expansion: 0.1 });
    void store.apply({ ...DEFAULT_CONFIG, expansion: 0.2 });
    void store.apply({ ...DEFAULT_CONFIG, expansion: 0.3 });
    expect(requests).toHaveLength(1);
    requests[0]!.deferred.resolve(jsonResponse(clusterBody({ expansion: 0.1 })));
    // apply() drains the queued request before resolving, so release the
    // second response as soon as it is issued, then await the chain
    await vi.waitFor(() => expect(requests).toHaveLength(2));
    expect((requests[1]!.body as { expansion: number }).expansion).toBe(0.3);
    requests[1]!.deferred.resolve(jsonResponse(clusterBody({ expansion: 0.3 })));
    await first;
    expect(store.state.history).toHaveLength(2);
    expect(store.state.busy).toBe(false);
  });

  it("marks repeated configs as duplicates", async () => {
    await store.loadGenerated("circles", 12, 0);
    for (const expansion of [0.5, 0.5]) {
      const call = store.apply({ ...DEFAULT_CONFIG, expansion });
      requests.at(-1)!.deferred.resolve(jsonResponse(clusterBody({ expansion })));
      await call;
    }
    expect(store.state.history[0]!.duplicate).toBe(false);
    expect(store.state.history[1]!.duplicate).toBe(true);
  });

  it("surfaces 400s with the offending field", async () => {
    await store.loadGenerated("circles", 12, 0);
    const call = store.apply({ ...DEFAULT_CONFIG, expansion: 1.5 });
    requests[0]!.deferred.resolve(
      jsonResponse({ error: "must be <= 1", field: "expansion" }, 400),
    );
    await call;
    expect(store.state.error).toEqual({ field: "expansion", message: "must be <= 1" });
    expect(store.state.history).toHaveLength(0);
    expect(store.state.busy).toBe(false);
  });

  it("caps history at the limit", async () => {
    await store.loadGenerated("circles", 12, 0);
    for (let i = 0; i < HISTORY_CAP + 5; i++) {
      const call = store.apply({ ...DEFAULT_CONFIG, seed: i });
      requests.at(-1)!.deferred.resolve(jsonResponse(clusterBody({ seed: i })));
      await call;
    }
    expect(store.state.history).toHaveLength(HISTORY_CAP);
    expect(store.state.history.at(-1)!.config.seed).toBe(HISTORY_CAP + 4);
  });

  it("exports history shaped like harness trial logs", async () => {
    await store.loadGenerated("circles", 12, 0);
    const call = store.apply(DEFAULT_CONFIG);
    requests[0]!.deferred.resolve(jsonResponse(clusterBody({})));
    await call;
    const lines = store.exportHistory().split("\n");
    expect(lines).toHaveLength(1);
    const row = JSON.parse(lines[0]!);
    expect(row.schema_version).toBe(1);
    expect(row.trial).toBe(1);
    expect(row.config.expansion).toBe(DEFAULT_CONFIG.expansion);
    expect(row).toHaveProperty("ari");
    expect(row).toHaveProperty("runtime_s");
  });

  it("rejects apply without a dataset", async () => {
    await store.apply(DEFAULT_CONFIG);
    expect(store.state.error?.message).toMatch(/dataset/);
  });
});

describe("helpers", () => {
  it("configsEqual compares every field", () => {
    expect(configsEqual(DEFAULT_CONFIG, { ...DEFAULT_CONFIG })).toBe(true);
    expect(configsEqual(DEFAULT_CONFIG, { ...DEFAULT_CONFIG, tau: 0.31 })).toBe(false);
  });

  it("ApiError keeps the field name", () => {
    const err = new ApiError(400, "bad", "blur");
    expect(err.field).toBe("blur");
    expect(err.status).toBe(400);
  });
});
