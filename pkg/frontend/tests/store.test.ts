/** CanvasStore: document adoption, serialization, positions, attempts. */

import { describe, expect, it } from "vitest";

import { CanvasStore } from "../src/store.js";
import { CONST_DESC, PROJECT_DOC, SQUARE_DESC, clone } from "./helpers.js";

function loadedStore(): CanvasStore {
  const store = new CanvasStore();
  store.rememberDescriptor(CONST_DESC);
  store.rememberDescriptor(SQUARE_DESC);
  store.adoptProject(clone(PROJECT_DOC));
  return store;
}

describe("CanvasStore", () => {
  it("round-trips the project document", () => {
    expect(loadedStore().serializeProject()).toEqual(PROJECT_DOC);
  });

  it("port markers reflect the descriptor exactly", () => {
    const store = loadedStore();
    const sq = store.nodes.get("sq")!;
    expect(sq.ports).toEqual(SQUARE_DESC.ports);
    expect(sq.label).toBe("square");
  });

  it("keeps positions across re-adoption", () => {
    const store = loadedStore();
    store.nodes.get("sq")!.position = { x: 555, y: 44 };
    store.adoptProject(clone(PROJECT_DOC));
    expect(store.nodes.get("sq")!.position).toEqual({ x: 555, y: 44 });
  });

  it("applies layout positions on first load", () => {
    const store = new CanvasStore();
    store.adoptProject(clone(PROJECT_DOC), { sq: { x: 9, y: 9 } });
    expect(store.nodes.get("sq")!.position).toEqual({ x: 9, y: 9 });
  });

  it("replaces attempts for the same pair", () => {
    const store = loadedStore();
    store.recordAttempt({ src: "c.x", dst: "sq.x", verdict: "pending" });
    store.recordAttempt({ src: "c.x", dst: "sq.x", verdict: "rejected",
                          reason: { code: "X", path: "p", detail: "d" } });
    expect(store.attempts).toHaveLength(1);
    expect(store.lastRejection()?.reason?.code).toBe("X");
    store.dropAttempt("c.x", "sq.x");
    expect(store.attempts).toHaveLength(0);
  });

  it("nodes without a known descriptor render with empty port lists", () => {
    const store = new CanvasStore();
    store.adoptProject(clone(PROJECT_DOC));
    expect(store.nodes.get("sq")!.ports).toEqual([]);
    expect(store.serializeProject()).toEqual(PROJECT_DOC);
  });
});
