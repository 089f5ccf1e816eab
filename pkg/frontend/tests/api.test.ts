/** ServeApi client plumbing: routes, result shapes, error mapping. */

import { describe, expect, it } from "vitest";

import { ApiHttpError, ServeApi } from "../src/api.js";
import { MockServe, PROJECT_DOC, clone } from "./helpers.js";

describe("ServeApi", () => {
  it("fetches the project document", async () => {
    const mock = new MockServe().json("GET", "/api/project", 200, clone(PROJECT_DOC));
    const api = new ServeApi("", mock.fetch);
    expect(await api.getProject()).toEqual(PROJECT_DOC);
  });

  it("returns a discriminated refusal for 409 edges", async () => {
    const violation = { code: "CYCLE", path: "a.y -> b.x", detail: "would loop" };
    const mock = new MockServe().json("POST", "/api/project/edges", 409, violation);
    const api = new ServeApi("", mock.fetch);
    const result = await api.addEdge({ src: "a.y", dst: "b.x" });
    expect(result).toEqual({ ok: false, violation });
    expect(mock.calls[0]).toEqual({
      method: "POST",
      path: "/api/project/edges",
      body: { src: "a.y", dst: "b.x" },
    });
  });

  it("maps error envelopes to ApiHttpError", async () => {
    const mock = new MockServe().json("DELETE", "/api/project/nodes/ghost", 404,
                                      { error: { code: "NOT_FOUND", detail: "no" } });
    const api = new ServeApi("", mock.fetch);
    await expect(api.deleteNode("ghost")).rejects.toThrowError(ApiHttpError);
    await expect(api.deleteNode("ghost")).rejects.toMatchObject({
      status: 404, code: "NOT_FOUND",
    });
  });

  it("builds registry search queries", async () => {
    const mock = new MockServe().json("GET", "/api/registry/search", 200, []);
    const api = new ServeApi("", mock.fetch);
    await api.searchRegistry({ text: "fft", limit: 5 });
    const url = new URL("http://x" + "/api/registry/search?text=fft&limit=5");
    expect(mock.calls[0].path).toBe(url.pathname);
  });

  it("returns violations for a refused run", async () => {
    const violations = [{ code: "CYCLE", path: "p", detail: "d" }];
    const mock = new MockServe().json("POST", "/api/project/run", 409, { violations });
    const api = new ServeApi("", mock.fetch);
    expect(await api.runProject()).toEqual({ ok: false, violations });
  });
});
