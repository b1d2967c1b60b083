/** Typed client for the tuning service. The UI never clusters locally:
 * every result on screen came back from one of these calls. */

export interface ClusterConfig {
  level: 1 | 2;
  expansion: number;
  blur: number;
  max_neighbors: number;
  min_cluster_size: number;
  policy: "reassign" | "noise";
  tau: number;
  heuristics: "default" | "identity";
  seeding: "ordered" | "random";
  index: "exact" | "accelerated";
  seed: number;
}

export const DEFAULT_CONFIG: ClusterConfig = {
  level: 1,
  expansion: 0.5,
  blur: 0.5,
  max_neighbors: 15,
  min_cluster_size: 5,
  policy: "reassign",
  tau: 0.3,
  heuristics: "default",
  seeding: "ordered",
  index: "exact",
  seed: 0,
};

export interface GeneratorRequest {
  kind: string;
  n_points?: number;
  noise?: number | null;
  seed?: number;
}

export interface DatasetCreated {
  id: string;
  name: string;
  n: number;
  d: number;
  has_truth: boolean;
}

export interface PointsResponse {
  id: string;
  dims: [number, number];
  x: number[];
  y: number[];
  truth: number[] | null;
  /** row index in the full dataset for each displayed point */
  indices: number[];
  n_total: number;
  displayed: number;
}

export interface ClusterResponse {
  id: string;
  labels: number[];
  n_clusters: number;
  n_noise: number;
  cluster_sizes: number[];
  runtime_s: number;
  ari: number | null;
  nmi: number | null;
  config: ClusterConfig;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public field: string | null = null,
  ) {
    super(message);
  }
}

async function unwrap<T>(response: Response): Promise<T> {
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    const message = typeof body.error === "string" ? body.error : response.statusText;
    throw new ApiError(response.status, message, body.field ?? null);
  }
  return body as T;
}

export class TuningApi {
  constructor(private baseUrl: string = "http://127.0.0.1:8237") {}

  async health(): Promise<boolean> {
    try {
      const r = await fetch(`${this.baseUrl}/health`);
      return r.ok;
    } catch {
      return false;
    }
  }

  createFromGenerator(generator: GeneratorRequest, name?: string): Promise<DatasetCreated> {
    return this.post("/datasets", { generator, name });
  }

  createFromCsv(csv: string, labelColumn?: string, name?: string): Promise<DatasetCreated> {
    return this.post("/datasets", { csv, label_column: labelColumn ?? null, name });
  }

  async points(datasetId: string, dims: [number, number]): Promise<PointsResponse> {
    const r = await fetch(
      `${this.baseUrl}/datasets/${datasetId}/points?dims=${dims[0]},${dims[1]}`,
    );
    return unwrap(r);
  }

  cluster(datasetId: string, config: ClusterConfig): Promise<ClusterResponse> {
    return this.post(`/datasets/${datasetId}/cluster`, config);
  }

  private async post<T>(path: string, payload: unknown): Promise<T> {
    const r = await fetch(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    return unwrap(r);
  }
}
