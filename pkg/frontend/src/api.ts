// Typed client for the creation-service HTTP API.  The fetch implementation
// is injectable so tests can record calls without a network.

import type {
  DatasetStats,
  DraftRecord,
  Granularity,
  QueueItem,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public errorName: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(res: Response): Promise<ApiError> {
  let name = "HttpError";
  let message = `${res.status}`;
  try {
    const body = await res.json();
    const detail = body?.detail;
    if (detail && typeof detail === "object" && "error" in detail) {
      name = String(detail.error);
      message = String(detail.message ?? message);
    } else if (typeof detail === "string") {
      message = detail;
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(res.status, name, message);
}

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(this.base + path, init);
    if (!res.ok) throw await parseError(res);
    if (res.status === 204) return undefined as T;
    return (await res.json()) as T;
  }

  postDraft(
    fields: Record<string, string>,
    label: string,
    granularity: Granularity = "component",
  ): Promise<DraftRecord> {
    const query = granularity === "term" ? "?granularity=term" : "";
    return this.request(`/api/drafts${query}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ fields, label }),
    });
  }

  submitDraft(draftId: string): Promise<{ sample_id: string }> {
    return this.request(`/api/drafts/${draftId}/submit`, { method: "POST" });
  }

  discardDraft(draftId: string): Promise<void> {
    return this.request(`/api/drafts/${draftId}/discard`, { method: "POST" });
  }

  getQueue(granularity: Granularity = "component"): Promise<QueueItem[]> {
    const query = granularity === "term" ? "?granularity=term" : "";
    return this.request(`/api/queue${query}`);
  }

  decide(
    sampleId: string,
    verdict: "accept" | "reject",
    feedback: string,
    validatorId: string,
  ): Promise<DraftRecord> {
    return this.request(`/api/samples/${sampleId}/decision`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ verdict, feedback, validator_id: validatorId }),
    });
  }

  getStats(): Promise<DatasetStats> {
    return this.request("/api/dataset/stats");
  }

  getSample(sampleId: string): Promise<DraftRecord> {
    return this.request(`/api/samples/${sampleId}`);
  }
}
