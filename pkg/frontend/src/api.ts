// Thin typed client over the project API. The UI never computes pixels:
// every image is fetched as a PNG body straight from these URLs.

import type {
  DagPayload,
  DiffPayload,
  MergePayload,
  NodePayload,
  PullPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let reply: Response;
  try {
    reply = await fetch(url, init);
  } catch (err) {
    throw new ApiError("Unreachable", `API unreachable: ${String(err)}`, 0);
  }
  const body = await reply.json().catch(() => ({}));
  if (!reply.ok) {
    const code = typeof body.error === "string" ? body.error : "HttpError";
    const message = typeof body.message === "string" ? body.message : reply.statusText;
    throw new ApiError(code, message, reply.status);
  }
  return body as T;
}

function post<T>(url: string, payload: unknown): Promise<T> {
  return request<T>(url, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
}

export class ApiClient {
  constructor(readonly base: string = "") {}

  getDag(): Promise<DagPayload> {
    return request(`${this.base}/api/dag`);
  }

  getNode(id: number): Promise<NodePayload> {
    return request(`${this.base}/api/node/${id}`);
  }

  getDiff(src: number, dst: number): Promise<DiffPayload> {
    return request(`${this.base}/api/diff?src=${src}&dst=${dst}`);
  }

  imageUrl(id: number): string {
    return `${this.base}/api/node/${id}/image.png`;
  }

  thumbUrl(id: number): string {
    return `${this.base}/api/node/${id}/thumb.png`;
  }

  frameUrl(src: number, dst: number, k: number): string {
    return `${this.base}/api/diff/frame?src=${src}&dst=${dst}&k=${k}`;
  }

  apply(parent: number, op: string, params: Record<string, string>, note = ""): Promise<{ node: number }> {
    return post(`${this.base}/api/apply`, { parent, op, params, note });
  }

  branch(from: number, op: string, params: Record<string, string>, note = ""): Promise<{ node: number }> {
    return post(`${this.base}/api/branch`, { from, op, params, note });
  }

  annotate(id: number, note: string): Promise<{ node: number; note: string }> {
    return post(`${this.base}/api/annotate`, { id, note });
  }

  merge(left: number, right: number): Promise<MergePayload> {
    return post(`${this.base}/api/merge`, { left, right });
  }

  commit(message: string): Promise<{ revision: number }> {
    return post(`${this.base}/api/commit`, { message });
  }

  push(): Promise<{ ok: boolean }> {
    return post(`${this.base}/api/push`, {});
  }

  pull(): Promise<PullPayload> {
    return post(`${this.base}/api/pull`, {});
  }
}
