// Typed client for the allocation service. The UI talks to the backend
// only through these endpoints.

export interface WhatifRequest {
  budget: number;
  floors?: Record<string, number>;
  target_gap?: number;
  solver?: "dp" | "greedy";
  utility_mode?: "score" | "score_times_population";
  cost_resolution?: number;
}

export interface RankingRow {
  record_id: string;
  district_id: number;
  district: string;
  group: string;
  score: number;
  cost: number;
  selected: boolean;
}

export interface WhatifResponse {
  selected: string[];
  total_utility: number;
  total_cost: number;
  per_group_counts: Record<string, number>;
  solver: string;
  parity_gap: number;
  solver_ms: number;
  ranking: RankingRow[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly group?: string,
  ) {
    super(message);
  }
}

export type FetchLike = (url: string, init: RequestInit) => Promise<Response>;

export async function postWhatif(
  base: string,
  req: WhatifRequest,
  fetchImpl: FetchLike,
  signal?: AbortSignal,
): Promise<WhatifResponse> {
  const res = await fetchImpl(`${base}/v1/whatif`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(req),
    signal,
  });
  if (!res.ok) {
    let detail = `HTTP ${res.status}`;
    let group: string | undefined;
    try {
      const body = await res.json();
      if (typeof body.detail === "string") detail = body.detail;
      if (typeof body.group === "string") group = body.group;
    } catch {
      // non-JSON error body, keep the status line
    }
    throw new ApiError(res.status, detail, group);
  }
  return (await res.json()) as WhatifResponse;
}
