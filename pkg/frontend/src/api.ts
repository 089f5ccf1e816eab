/**
 * Typed client over the serve API.
 *
 * Mutations that the server may refuse (edges, replace, run) resolve to
 * a discriminated result instead of throwing, so callers can render the
 * refusal payload exactly as received; only transport failures throw.
 */

import type {
  EdgeEntry,
  LayoutDoc,
  ProjectDoc,
  RegistryRecordDoc,
  ReplaceRejection,
  RunReportDoc,
  Scalar,
  SubstituteEntry,
  Violation,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export type EdgeResult =
  | { ok: true; project: ProjectDoc }
  | { ok: false; violation: Violation };

export type ReplaceResult =
  | { ok: true; project: ProjectDoc }
  | { ok: false; rejection: ReplaceRejection };

export type RunResult =
  | { ok: true; report: RunReportDoc }
  | { ok: false; violations: Violation[] };

export class ApiHttpError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
  ) {
    super(`${status} ${code}: ${detail}`);
  }
}

export class ServeApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(method: string, path: string, body?: unknown): Promise<{
    status: number;
    payload: unknown;
  }> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    const text = await response.text();
    return { status: response.status, payload: text ? JSON.parse(text) : null };
  }

  private async expectOk<T>(method: string, path: string, body?: unknown): Promise<T> {
    const { status, payload } = await this.request(method, path, body);
    if (status >= 400) {
      const err = (payload as { error?: { code?: string; detail?: string } })?.error;
      throw new ApiHttpError(status, err?.code ?? `HTTP_${status}`, err?.detail ?? "");
    }
    return payload as T;
  }

  getProject(): Promise<ProjectDoc> {
    return this.expectOk("GET", "/api/project");
  }

  addNode(id: string, component: string, version: string,
          params: Record<string, Scalar>): Promise<ProjectDoc> {
    return this.expectOk("POST", "/api/project/nodes", { id, component, version, params });
  }

  deleteNode(id: string): Promise<ProjectDoc> {
    return this.expectOk("DELETE", `/api/project/nodes/${encodeURIComponent(id)}`);
  }

  async addEdge(edge: EdgeEntry): Promise<EdgeResult> {
    const { status, payload } = await this.request("POST", "/api/project/edges", edge);
    if (status === 200) {
      return { ok: true, project: payload as ProjectDoc };
    }
    if (status === 409) {
      return { ok: false, violation: payload as Violation };
    }
    const err = (payload as { error?: { code?: string; detail?: string } })?.error;
    throw new ApiHttpError(status, err?.code ?? `HTTP_${status}`, err?.detail ?? "");
  }

  substitutes(nodeId: string): Promise<SubstituteEntry[]> {
    return this.expectOk(
      "GET", `/api/project/nodes/${encodeURIComponent(nodeId)}/substitutes`);
  }

  async replaceNode(nodeId: string, component: string,
                    version: string): Promise<ReplaceResult> {
    const { status, payload } = await this.request(
      "POST", `/api/project/nodes/${encodeURIComponent(nodeId)}/replace`,
      { component, version });
    if (status === 200) {
      return { ok: true, project: payload as ProjectDoc };
    }
    if (status === 409) {
      return { ok: false, rejection: payload as ReplaceRejection };
    }
    const err = (payload as { error?: { code?: string; detail?: string } })?.error;
    throw new ApiHttpError(status, err?.code ?? `HTTP_${status}`, err?.detail ?? "");
  }

  setParams(nodeId: string, params: Record<string, Scalar>): Promise<ProjectDoc> {
    return this.expectOk(
      "POST", `/api/project/nodes/${encodeURIComponent(nodeId)}/params`, { params });
  }

  async validate(): Promise<Violation[]> {
    const body = await this.expectOk<{ violations: Violation[] }>(
      "POST", "/api/project/validate");
    return body.violations;
  }

  async runProject(): Promise<RunResult> {
    const { status, payload } = await this.request("POST", "/api/project/run");
    if (status === 200) {
      return { ok: true, report: payload as RunReportDoc };
    }
    if (status === 409) {
      return { ok: false, violations: (payload as { violations: Violation[] }).violations };
    }
    const err = (payload as { error?: { code?: string; detail?: string } })?.error;
    throw new ApiHttpError(status, err?.code ?? `HTTP_${status}`, err?.detail ?? "");
  }

  searchRegistry(query: { text?: string; tag?: string; provides_type?: string;
                          uses_type?: string; limit?: number }):
      Promise<RegistryRecordDoc[]> {
    const params = new URLSearchParams();
    if (query.text !== undefined) params.set("text", query.text);
    if (query.tag !== undefined) params.set("tag", query.tag);
    if (query.provides_type !== undefined) params.set("provides_type", query.provides_type);
    if (query.uses_type !== undefined) params.set("uses_type", query.uses_type);
    if (query.limit !== undefined) params.set("limit", String(query.limit));
    return this.expectOk("GET", `/api/registry/search?${params.toString()}`);
  }

  getLayout(): Promise<LayoutDoc> {
    return this.expectOk("GET", "/api/layout");
  }

  putLayout(layout: LayoutDoc): Promise<LayoutDoc> {
    return this.expectOk("PUT", "/api/layout", layout);
  }
}
