// Typed client for the visualization service JSON API.

export interface ChildInfo {
  id: number;
  leaf_count: number;
  label: string;
}

export interface MetricsDoc {
  nd: number | "inf" | null;
  ulcv: number | "inf" | null;
  nd_bound: number | "inf" | null;
  ulcv_bound: number | "inf" | null;
  within_bounds: { nd: boolean | null; ulcv: boolean | null };
}

export interface LayoutResponse {
  supernode: number;
  seed: number;
  children: ChildInfo[];
  coords: [number, number][];
  super_edges: [number, number][];
  metrics: MetricsDoc;
}

export interface HierarchyInfo {
  root: number;
  levels: number;
  k: number;
  n: number;
  m: number;
}

export interface NodeInfo {
  id: number;
  level: number;
  parent: number | null;
  label: string;
  children: ChildInfo[];
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function getJson<T>(url: string, signal?: AbortSignal): Promise<T> {
  const resp = await fetch(url, { signal });
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = (await resp.json()) as { error?: string };
      if (body.error) detail = body.error;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  constructor(readonly baseUrl: string = "") {}

  hierarchy(signal?: AbortSignal): Promise<HierarchyInfo> {
    return getJson(`${this.baseUrl}/api/hierarchy`, signal);
  }

  node(id: number, signal?: AbortSignal): Promise<NodeInfo> {
    return getJson(`${this.baseUrl}/api/node/${id}`, signal);
  }

  layout(id: number, seed?: number, signal?: AbortSignal): Promise<LayoutResponse> {
    const query = seed === undefined ? "" : `?seed=${seed}`;
    return getJson(`${this.baseUrl}/api/layout/${id}${query}`, signal);
  }
}
