/** HTTP client for the curation service. All state lives server-side; the
 * client only ever POSTs edits tagged with the version it saw, so a stale
 * write comes back as a 409 carrying the current version. */

import type { Category, EditOp, ItemDetail, ItemSummary, StatsResponse } from "./types.js";

export interface HttpResponse {
  status: number;
  json(): Promise<unknown>;
  text(): Promise<string>;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<HttpResponse>;

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

export type SaveResult =
  | { ok: true; item: ItemDetail }
  | { ok: false; conflict: true; currentVersion: number; message: string };

interface ConflictDetail {
  message: string;
  current_version: number;
}

function conflictDetail(body: unknown): ConflictDetail {
  const detail = (body as { detail?: unknown })?.detail;
  if (detail && typeof detail === "object" && "current_version" in detail) {
    const d = detail as { message?: string; current_version: number };
    return { message: d.message ?? "version conflict", current_version: d.current_version };
  }
  return { message: "version conflict", current_version: -1 };
}

export class ApiClient {
  constructor(
    private readonly fetchImpl: FetchLike,
    private readonly base = "",
  ) {}

  private itemPath(key: string): string {
    return `${this.base}/items/${encodeURIComponent(key)}`;
  }

  private async expectJson<T>(response: HttpResponse, context: string): Promise<T> {
    if (response.status !== 200) {
      throw new ApiError(`${context}: HTTP ${response.status}`, response.status);
    }
    return (await response.json()) as T;
  }

  async listItems(filter: { status?: string; language?: string } = {}): Promise<ItemSummary[]> {
    const params = new URLSearchParams();
    if (filter.status) params.set("status", filter.status);
    if (filter.language) params.set("language", filter.language);
    const query = params.toString();
    const response = await this.fetchImpl(`${this.base}/items${query ? "?" + query : ""}`);
    const body = await this.expectJson<{ items: ItemSummary[] }>(response, "list items");
    return body.items;
  }

  async getItem(key: string): Promise<ItemDetail> {
    const response = await this.fetchImpl(this.itemPath(key));
    return this.expectJson<ItemDetail>(response, `get item ${key}`);
  }

  async saveEdit(key: string, version: number, edit: EditOp): Promise<SaveResult> {
    const response = await this.fetchImpl(`${this.itemPath(key)}/edits`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ version, ...edit }),
    });
    if (response.status === 409) {
      const detail = conflictDetail(await response.json());
      return {
        ok: false,
        conflict: true,
        currentVersion: detail.current_version,
        message: detail.message,
      };
    }
    const item = await this.expectJson<ItemDetail>(response, `save edit on ${key}`);
    return { ok: true, item };
  }

  async tagCategory(
    key: string,
    qaIndex: number,
    version: number,
    category: Category,
  ): Promise<SaveResult> {
    const response = await this.fetchImpl(`${this.itemPath(key)}/qas/${qaIndex}/category`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ version, category }),
    });
    if (response.status === 409) {
      const detail = conflictDetail(await response.json());
      return {
        ok: false,
        conflict: true,
        currentVersion: detail.current_version,
        message: detail.message,
      };
    }
    const item = await this.expectJson<ItemDetail>(response, `tag category on ${key}`);
    return { ok: true, item };
  }

  async stats(): Promise<StatsResponse> {
    const response = await this.fetchImpl(`${this.base}/stats`);
    return this.expectJson<StatsResponse>(response, "stats");
  }
}
