/** Mocked serve API and shared fixtures for the studio tests. */

import type {
  DescriptorDoc,
  ProjectDoc,
  RegistryRecordDoc,
  RunReportDoc,
} from "../src/types.js";

type Handler = (query: URLSearchParams, body: unknown) =>
  { status: number; body: unknown };

export class MockServe {
  routes = new Map<string, Handler>();
  calls: { method: string; path: string; body: unknown }[] = [];

  on(method: string, path: string, handler: Handler): this {
    this.routes.set(`${method} ${path}`, handler);
    return this;
  }

  json(method: string, path: string, status: number, body: unknown): this {
    return this.on(method, path, () => ({ status, body }));
  }

  fetch = async (input: string, init?: RequestInit): Promise<Response> => {
    const url = new URL(input, "http://studio.test");
    const method = (init?.method ?? "GET").toUpperCase();
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    this.calls.push({ method, path: url.pathname, body });
    const handler = this.routes.get(`${method} ${url.pathname}`);
    if (!handler) {
      return jsonResponse(404, { error: { code: "NO_ROUTE", detail: url.pathname } });
    }
    const { status, body: payload } = handler(url.searchParams, body);
    return jsonResponse(status, payload);
  };
}

export function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function descriptor(
  name: string,
  ports: { name: string; direction: "uses" | "provides"; kind: string }[],
  params: { name: string; kind: string; default?: number | string | boolean }[] = [],
): DescriptorDoc {
  return {
    name,
    version: "1.0.0",
    kind: "elementary",
    doc: { summary: `summary of ${name}`, description: "", authors: [] },
    tags: ["math/arithmetic"],
    ports: ports.map((p) => ({
      name: p.name,
      direction: p.direction,
      datatype: { kind: p.kind },
      required: true,
      doc: "",
    })),
    params: params.map((p) => ({
      name: p.name,
      datatype: { kind: p.kind },
      default: p.default,
      doc: "",
    })),
    behavior: { deterministic: true, stateful: false },
    representation: { label: name.split(".").pop()!, category: "math" },
    implementation: { backend: "builtin", artifact: name, entry: "", platforms: ["any"] },
  };
}

export const EX = "org.comodi.examples";

export const CONST_DESC = descriptor(`${EX}.const`,
  [{ name: "x", direction: "provides", kind: "real64" }],
  [{ name: "value", kind: "real64", default: 0 }]);
export const SQUARE_DESC = descriptor(`${EX}.square`, [
  { name: "x", direction: "uses", kind: "real64" },
  { name: "y", direction: "provides", kind: "real64" },
]);
export const CUBE_DESC = descriptor(`${EX}.cube`, [
  { name: "x", direction: "uses", kind: "real64" },
  { name: "y", direction: "provides", kind: "real64" },
]);
export const CAPTURE_DESC = descriptor(`${EX}.capture`, [
  { name: "x", direction: "uses", kind: "real64" },
  { name: "captured", direction: "provides", kind: "real64" },
]);
export const TEXT_DESC = descriptor(`${EX}.text_const`,
  [{ name: "x", direction: "provides", kind: "text" }],
  [{ name: "value", kind: "text", default: "" }]);

export function record(d: DescriptorDoc, downloads: number): RegistryRecordDoc {
  return {
    descriptor: d,
    artifact_url: `builtin:${d.name}@${d.version}`,
    published_at: "2026-01-01T00:00:00+00:00",
    download_count: downloads,
    publisher: "fixture",
  };
}

/** download-ranked, as the registry would answer */
export const SEARCH_RESULTS: RegistryRecordDoc[] = [
  record(SQUARE_DESC, 12),
  record(CONST_DESC, 7),
  record(CUBE_DESC, 3),
  record(CAPTURE_DESC, 1),
  record(TEXT_DESC, 0),
];

export const PROJECT_DOC: ProjectDoc = {
  meta: { title: "demo", description: "" },
  nodes: {
    c: { component: `${EX}.const`, version: "1.0.0", params: { value: 2.0 } },
    cap: { component: `${EX}.capture`, version: "1.0.0", params: {} },
    sq: { component: `${EX}.square`, version: "1.0.0", params: {} },
  },
  edges: [
    { src: "c.x", dst: "sq.x" },
    { src: "sq.y", dst: "cap.x" },
  ],
};

export const RUN_REPORT: RunReportDoc = {
  project_hash: "abc123",
  totals: { wall_ns: 2_500_000, nodes: 3 },
  nodes: [
    { id: "c", start_ns: 100, stop_ns: 200, status: "ok", outputs: { x: 2.0 } },
    { id: "sq", start_ns: 210, stop_ns: 330, status: "ok", outputs: { y: 4.0 } },
    { id: "cap", start_ns: 340, stop_ns: 400, status: "ok",
      outputs: { captured: 4.0 } },
  ],
};

export function standardMock(): MockServe {
  const mock = new MockServe();
  mock.json("GET", "/api/registry/search", 200, SEARCH_RESULTS);
  mock.json("GET", "/api/project", 200, clone(PROJECT_DOC));
  mock.json("GET", "/api/layout", 200, {});
  mock.json("PUT", "/api/layout", 200, {});
  return mock;
}

export function clone<T>(value: T): T {
  return JSON.parse(JSON.stringify(value)) as T;
}
