import { ClassInfo, EvalSummary, ImageRef, RankedDocument } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    detail: string,
  ) {
    super(detail);
  }
}

async function fail(resp: Response): Promise<never> {
  let detail = `${resp.status} ${resp.statusText}`;
  try {
    const body = await resp.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status line
  }
  throw new ApiError(resp.status, detail);
}

/**
 * Thin client over the retrieval service. At most one query request is in
 * flight: starting a new one aborts the previous.
 */
export class ApiClient {
  private queryController: AbortController | null = null;

  constructor(readonly baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async health(): Promise<string> {
    const resp = await fetch(this.url("/api/health"));
    if (!resp.ok) await fail(resp);
    return resp.text();
  }

  async classes(): Promise<ClassInfo[]> {
    const resp = await fetch(this.url("/api/classes"));
    if (!resp.ok) await fail(resp);
    return resp.json();
  }

  async images(className: string | null, page: number, per: number): Promise<ImageRef[]> {
    const params = new URLSearchParams({ page: String(page), per: String(per) });
    if (className !== null) params.set("class", className);
    const resp = await fetch(this.url(`/api/images?${params}`));
    if (!resp.ok) await fail(resp);
    return resp.json();
  }

  thumbnailUrl(id: number): string {
    return this.url(`/api/images/${id}/thumbnail`);
  }

  private async runQuery(init: RequestInit): Promise<RankedDocument> {
    this.queryController?.abort();
    const controller = new AbortController();
    this.queryController = controller;
    const resp = await fetch(this.url("/api/query"), { ...init, signal: controller.signal });
    if (!resp.ok) await fail(resp);
    return resp.json();
  }

  queryById(id: number, k: number, excludeSelf: boolean): Promise<RankedDocument> {
    return this.runQuery({
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ id, k, exclude_self: excludeSelf }),
    });
  }

  queryByUpload(file: Blob, name: string, k: number): Promise<RankedDocument> {
    const form = new FormData();
    form.append("image", file, name);
    form.append("k", String(k));
    return this.runQuery({ method: "POST", body: form });
  }

  async evalSummary(k: number): Promise<EvalSummary> {
    const resp = await fetch(this.url(`/api/eval/summary?k=${k}`));
    if (!resp.ok) await fail(resp);
    return resp.json();
  }
}
