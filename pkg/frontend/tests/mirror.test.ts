/**
 * Mirror fidelity against a mocked serve API: rendered verdicts equal
 * the mocked responses, a refused gesture leaves the canvas-serialized
 * project identical to the pre-gesture document, and the run panel
 * shows exactly the report payload.
 */

import { beforeEach, describe, expect, it } from "vitest";

import { ServeApi } from "../src/api.js";
import { StudioApp } from "../src/app.js";
import {
  CUBE_DESC,
  EX,
  PROJECT_DOC,
  RUN_REPORT,
  SEARCH_RESULTS,
  clone,
  standardMock,
} from "./helpers.js";

async function mount(mock = standardMock()): Promise<{ app: StudioApp; root: HTMLElement }> {
  document.body.innerHTML = "";
  const root = document.createElement("div");
  document.body.append(root);
  const app = new StudioApp(root, new ServeApi("", mock.fetch));
  await app.init();
  return { app, root };
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("palette mirrors registry search", () => {
  it("renders results in exactly the API order", async () => {
    const { root } = await mount();
    const cards = [...root.querySelectorAll("[data-palette-item]")];
    expect(cards.map((c) => c.getAttribute("data-component"))).toEqual(
      SEARCH_RESULTS.map((r) => r.descriptor.name));
  });

  it("shows the empty state on no results, not an error", async () => {
    const mock = standardMock();
    mock.json("GET", "/api/registry/search", 200, []);
    const { root } = await mount(mock);
    expect(root.querySelector('[data-empty="palette"]')).not.toBeNull();
    expect(root.querySelector('[data-banner="offline"]')).toBeNull();
  });

  it("shows the offline banner when the registry is unreachable", async () => {
    const mock = standardMock();
    mock.on("GET", "/api/registry/search", () => {
      throw new TypeError("fetch failed");
    });
    const { root } = await mount(mock);
    expect(root.querySelector('[data-banner="offline"]')).not.toBeNull();
  });
});

describe("connect gesture", () => {
  it("renders the edge after a 200", async () => {
    const mock = standardMock();
    const withEdge = clone(PROJECT_DOC);
    withEdge.nodes.cap2 = { component: `${EX}.capture`, version: "1.0.0", params: {} };
    withEdge.edges = [...withEdge.edges, { src: "sq.y", dst: "cap2.x" }];
    mock.json("POST", "/api/project/edges", 200, withEdge);
    const { app, root } = await mount(mock);
    await app.connectGesture("sq.y", "cap2.x");
    expect(root.querySelector('[data-edge="sq.y->cap2.x"]')).not.toBeNull();
    expect(app.store.serializeProject()).toEqual(withEdge);
  });

  it("renders the server's violation verbatim on a 409 and leaves the "
     + "canvas-serialized project identical to the pre-gesture document", async () => {
    const mock = standardMock();
    const violation = {
      code: "DUPLICATE_BINDING",
      path: "cap.x",
      detail: "uses port already bound from sq.y",
    };
    mock.json("POST", "/api/project/edges", 409, violation);
    const { app, root } = await mount(mock);
    const before = clone(app.store.serializeProject());
    expect(before).toEqual(PROJECT_DOC); // canvas state === GET /api/project

    await app.connectGesture("c.x", "cap.x");

    const port = root.querySelector('[data-port="cap.x"]');
    expect(port?.getAttribute("data-rejected")).toBe(violation.detail);
    expect(port?.querySelector("title")?.textContent).toBe(
      `${violation.code}: ${violation.detail}`);
    expect(app.store.serializeProject()).toEqual(before);
    expect(root.querySelector('[data-edge="c.x->cap.x"]')).toBeNull();
  });

  it("renders a type-mismatch reason exactly as received", async () => {
    const mock = standardMock();
    const violation = {
      code: "TYPE_MISMATCH",
      path: "t.x -> sq.x",
      detail: "kind mismatch: text provided, real64 used",
    };
    mock.json("POST", "/api/project/edges", 409, violation);
    const { app, root } = await mount(mock);
    await app.connectGesture("t.x", "sq.x");
    expect(root.querySelector('[data-port="sq.x"]')?.getAttribute("data-rejected"))
      .toBe(violation.detail);
  });

  it("cancels the gesture and keeps the project on a network failure", async () => {
    const mock = standardMock();
    mock.on("POST", "/api/project/edges", () => {
      throw new TypeError("fetch failed");
    });
    const { app, root } = await mount(mock);
    const before = clone(app.store.serializeProject());
    await app.connectGesture("c.x", "cap.x");
    expect(app.store.serializeProject()).toEqual(before);
    expect(app.store.attempts).toHaveLength(0);
    expect(root.querySelector('[data-section="status"]')?.textContent)
      .toContain("fetch failed");
  });
});

describe("substitute dialog", () => {
  it("lists exactly the mocked substitutes", async () => {
    const mock = standardMock();
    const candidates = [
      { component: `${EX}.cube`, version: "1.0.0", summary: "summary of cube",
        label: "cube", download_count: 3 },
      { component: `${EX}.negate`, version: "1.0.0", summary: "summary of negate",
        label: "negate", download_count: 1 },
    ];
    mock.json("GET", "/api/project/nodes/sq/substitutes", 200, candidates);
    const { app, root } = await mount(mock);
    await app.openSubstitutes("sq");
    const items = [...root.querySelectorAll("[data-substitute]")];
    expect(items.map((i) => i.getAttribute("data-component"))).toEqual(
      candidates.map((c) => c.component));
  });

  it("shows the empty state when no substitutes exist", async () => {
    const mock = standardMock();
    mock.json("GET", "/api/project/nodes/cap/substitutes", 200, []);
    const { app, root } = await mount(mock);
    await app.openSubstitutes("cap");
    expect(root.querySelector('[data-empty="substitutes"]')).not.toBeNull();
  });

  it("applies a replacement and keeps both edges on screen", async () => {
    const mock = standardMock();
    mock.json("GET", "/api/project/nodes/sq/substitutes", 200, [
      { component: `${EX}.cube`, version: "1.0.0", summary: "summary of cube",
        label: "cube", download_count: 3 },
    ]);
    const replaced = clone(PROJECT_DOC);
    replaced.nodes.sq = { component: `${EX}.cube`, version: "1.0.0", params: {} };
    mock.json("POST", "/api/project/nodes/sq/replace", 200, replaced);
    const { app, root } = await mount(mock);
    await app.openSubstitutes("sq");
    await app.applySubstitute({ component: `${EX}.cube`, version: "1.0.0",
                                summary: "summary of cube", label: "cube",
                                download_count: 3 });
    expect(app.store.serializeProject()).toEqual(replaced);
    expect(root.querySelectorAll(".edge")).toHaveLength(2);
    expect(root.querySelector('[data-edge="c.x->sq.x"]')).not.toBeNull();
    expect(root.querySelector('[data-edge="sq.y->cap.x"]')).not.toBeNull();
  });

  it("shows the server verdict and keeps the canvas on a rejected replace",
     async () => {
    const mock = standardMock();
    mock.json("GET", "/api/project/nodes/sq/substitutes", 200, [
      { component: `${EX}.text_const`, version: "1.0.0", summary: "s",
        label: "text_const", download_count: 0 },
    ]);
    const rejection = {
      code: "TYPE_MISMATCH",
      path: "nodes.sq",
      detail: "uses x: candidate has no uses port 'x'",
      reports: [{ name: "x", kind: "uses", ok: false,
                  reason: "candidate has no uses port 'x'" }],
    };
    mock.json("POST", "/api/project/nodes/sq/replace", 409, rejection);
    const { app, root } = await mount(mock);
    const before = clone(app.store.serializeProject());
    await app.openSubstitutes("sq");
    await app.applySubstitute({ component: `${EX}.text_const`, version: "1.0.0",
                                summary: "s", label: "text_const",
                                download_count: 0 });
    const bannerEl = root.querySelector("[data-replace-rejected]");
    expect(bannerEl?.getAttribute("data-replace-rejected")).toBe(rejection.code);
    expect(bannerEl?.textContent).toBe(`${rejection.code}: ${rejection.detail}`);
    expect(app.store.serializeProject()).toEqual(before);
  });
});

describe("run view", () => {
  it("renders values equal to the report payload", async () => {
    const mock = standardMock();
    mock.json("POST", "/api/project/run", 200, RUN_REPORT);
    const { app, root } = await mount(mock);
    await app.runProject();
    for (const node of RUN_REPORT.nodes) {
      for (const [port, value] of Object.entries(node.outputs)) {
        const cell = root.querySelector(`[data-run-value="${node.id}.${port}"]`);
        expect(cell?.textContent).toBe(JSON.stringify(value));
      }
      const row = root.querySelector(`[data-run-node="${node.id}"]`);
      expect(row?.getAttribute("data-run-status")).toBe(node.status);
    }
  });

  it("marks the downstream cone skipped exactly as the report says", async () => {
    const mock = standardMock();
    const report = clone(RUN_REPORT);
    report.nodes[1] = { id: "sq", start_ns: 210, stop_ns: 330, status: "error",
                        outputs: {}, error: { code: "BOOM", detail: "sq blew up" } };
    report.nodes[2] = { id: "cap", start_ns: 340, stop_ns: 340, status: "skipped",
                        outputs: {},
                        error: { code: "SKIPPED", detail: "upstream failed: sq" } };
    mock.json("POST", "/api/project/run", 200, report);
    const { app, root } = await mount(mock);
    await app.runProject();
    expect(root.querySelector('[data-run-node="sq"]')?.getAttribute("data-run-status"))
      .toBe("error");
    expect(root.querySelector('[data-run-node="cap"]')?.getAttribute("data-run-status"))
      .toBe("skipped");
    // the canvas node itself is marked from the report too
    expect(root.querySelector('[data-node="cap"]')?.getAttribute("data-run-status"))
      .toBe("skipped");
    expect(root.querySelector('[data-run-node="sq"] .run-error')?.textContent)
      .toBe("BOOM: sq blew up");
  });

  it("renders violations instead of running when the project is invalid",
     async () => {
    const mock = standardMock();
    const violations = [{ code: "UNBOUND_REQUIRED_USES", path: "sq.x",
                          detail: "required uses port is not bound" }];
    mock.json("POST", "/api/project/run", 409, { violations });
    const { app, root } = await mount(mock);
    await app.runProject();
    const rows = [...root.querySelectorAll("[data-violation-code]")];
    expect(rows.map((r) => r.getAttribute("data-violation-code")))
      .toEqual(["UNBOUND_REQUIRED_USES"]);
    expect(root.querySelector("[data-run-value]")).toBeNull();
  });
});

describe("canvas document mirror", () => {
  it("serializes to exactly the served project document after gestures", async () => {
    const mock = standardMock();
    const afterParams = clone(PROJECT_DOC);
    afterParams.nodes.c.params = { value: 9 };
    mock.json("POST", "/api/project/nodes/c/params", 200, afterParams);
    const { app } = await mount(mock);
    expect(app.store.serializeProject()).toEqual(PROJECT_DOC);
    await app.applyParams("c", { value: "9" });
    expect(app.store.serializeProject()).toEqual(afterParams);
  });

  it("keeps node positions out of the project document", async () => {
    const { app } = await mount();
    await app.moveNode("sq", 300, 200);
    expect(app.store.serializeProject()).toEqual(PROJECT_DOC);
    expect(app.store.layout().sq).toEqual({ x: 300, y: 200 });
  });
});
