// Typed client for the estimation service. The explorer never computes
// statistics itself: every plotted number comes out of these responses.

export interface PathEntry {
  k: number;
  xi: number | null;
  sigma?: number;
  delta?: number;
  converged: boolean;
  ci?: [number, number];
  tail?: Record<string, number | null>;
}

export interface PathResponse {
  schema_version: number;
  method: string;
  label: string;
  dataset: string;
  entries: PathEntry[];
}

export interface GofResponse {
  schema_version: number;
  dataset: string;
  correlation: number;
  points: [number, number][];
}

export interface DatasetSummary {
  id: string;
  name: string;
  n: number;
}

export interface MinvarResponse {
  schema_version: number;
  method: string;
  selected: Record<string, number | string>;
}

async function getJson<T>(url: string): Promise<T> {
  const res = await fetch(url);
  const body = await res.json();
  if (!res.ok) {
    throw new Error(body && body.error ? String(body.error) : `HTTP ${res.status}`);
  }
  return body as T;
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  listDatasets(): Promise<{ datasets: DatasetSummary[] }> {
    return getJson(`${this.base}/datasets`);
  }

  fetchPath(dataset: string, method: string, params: Record<string, number>,
            opts: { ci?: number; smooth?: number; c?: number } = {}): Promise<PathResponse> {
    const query = new URLSearchParams({ method });
    for (const [key, value] of Object.entries(params)) {
      query.set(key, String(value));
    }
    if (opts.ci && opts.ci > 0) query.set("ci", String(opts.ci));
    if (opts.smooth && opts.smooth > 1) query.set("smooth", String(opts.smooth));
    if (opts.c !== undefined) query.set("c", String(opts.c));
    return getJson(`${this.base}/datasets/${encodeURIComponent(dataset)}/path?${query}`);
  }

  fetchTail(dataset: string, method: string, k: number, c: number,
            params: Record<string, number>): Promise<{ value: number; kind: string }> {
    const query = new URLSearchParams({ method, k: String(k), c: String(c) });
    for (const [key, value] of Object.entries(params)) {
      query.set(key, String(value));
    }
    return getJson(`${this.base}/datasets/${encodeURIComponent(dataset)}/tail?${query}`);
  }

  fetchGof(dataset: string, xi0: number, sigma0: number, a: number): Promise<GofResponse> {
    const query = new URLSearchParams({ xi0: String(xi0), sigma0: String(sigma0), a: String(a) });
    return getJson(`${this.base}/datasets/${encodeURIComponent(dataset)}/gof?${query}`);
  }

  fetchMinvar(dataset: string, method: string): Promise<MinvarResponse> {
    const query = new URLSearchParams({ method });
    return getJson(`${this.base}/datasets/${encodeURIComponent(dataset)}/minvar?${query}`);
  }
}

// Overlapping refetches resolve last-write-wins: stale responses are dropped
// by sequence number, regardless of network ordering.
export class LatestWins {
  private seq = 0;

  async run<T>(work: () => Promise<T>): Promise<T | null> {
    const ticket = ++this.seq;
    const result = await work();
    return ticket === this.seq ? result : null;
  }
}
