/**
 * DOM renderers for the studio surfaces: palette, canvas, inspector,
 * substitute dialog, run panel.  Framework-free immediate-mode
 * rendering; every element that carries API-origin content is tagged
 * with data attributes so tests can check the mirror byte for byte.
 */

import type { CanvasNodeView, CanvasStore, ConnectionAttempt } from "./store.js";
import type {
  DataTypeDoc,
  PortDoc,
  RegistryRecordDoc,
  RunReportDoc,
  SubstituteEntry,
  Violation,
} from "./types.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function typeLabel(t: DataTypeDoc): string {
  switch (t.kind) {
    case "array": {
      const extents = t.extents ? `[${t.extents.map((e) => e ?? "*").join(",")}]` : "";
      return `array<${typeLabel(t.element!)},${t.rank}>${extents}`;
    }
    case "composite":
      return `{${Object.keys(t.fields ?? {}).sort().join(",")}}`;
    case "opaque":
      return `${t.name}@${t.version}`;
    default:
      return t.kind;
  }
}

// -- palette ---------------------------------------------------------------

export function renderPalette(
  container: HTMLElement,
  records: RegistryRecordDoc[],
  state: { query: string; offline: boolean },
  handlers: { onSearch(text: string): void; onAdd(record: RegistryRecordDoc): void },
): void {
  container.textContent = "";
  const input = el("input", {
    class: "palette-search",
    type: "search",
    placeholder: "search components",
    value: state.query,
  });
  input.addEventListener("change", () => handlers.onSearch(input.value));
  container.append(el("div", { class: "palette-header" }, [input]));

  if (state.offline) {
    container.append(el("div", { class: "banner offline", "data-banner": "offline" },
                        ["registry unreachable"]));
    return;
  }
  if (records.length === 0) {
    container.append(el("div", { class: "empty-state", "data-empty": "palette" },
                        ["no components matched"]));
    return;
  }
  const list = el("ul", { class: "palette-list" });
  records.forEach((record, index) => {
    const d = record.descriptor;
    const ports = d.ports
      .map((p) => `${p.direction === "uses" ? "▸" : "◂"}${p.name}:${typeLabel(p.datatype)}`)
      .join("  ");
    const card = el("li", {
      class: "palette-card",
      "data-palette-item": String(index),
      "data-component": d.name,
      "data-version": d.version,
    }, [
      el("div", { class: "card-title" }, [`${d.representation.label || d.name}`]),
      el("div", { class: "card-meta" },
         [`${d.name}@${d.version} ↓${record.download_count}`]),
      el("div", { class: "card-summary" }, [d.doc.summary]),
      el("div", { class: "card-ports" }, [ports]),
    ]);
    card.addEventListener("dblclick", () => handlers.onAdd(record));
    const add = el("button", { class: "card-add" }, ["add"]);
    add.addEventListener("click", () => handlers.onAdd(record));
    card.append(add);
    list.append(card);
  });
  container.append(list);
}

// -- canvas ----------------------------------------------------------------

const NODE_WIDTH = 168;
const PORT_STEP = 22;
const HEADER = 26;

function nodeHeight(view: CanvasNodeView): number {
  const uses = view.ports.filter((p) => p.direction === "uses").length;
  const provides = view.ports.filter((p) => p.direction === "provides").length;
  return HEADER + Math.max(uses, provides, 1) * PORT_STEP + 8;
}

function portPosition(view: CanvasNodeView, port: PortDoc): { x: number; y: number } {
  const same = view.ports.filter((p) => p.direction === port.direction);
  const index = same.findIndex((p) => p.name === port.name);
  return {
    x: view.position.x + (port.direction === "uses" ? 0 : NODE_WIDTH),
    y: view.position.y + HEADER + index * PORT_STEP + PORT_STEP / 2,
  };
}

export interface CanvasHandlers {
  onPortClick(ref: string, direction: "uses" | "provides"): void;
  onNodeSelect(id: string): void;
  onNodeMove(id: string, x: number, y: number): void;
}

export function renderCanvas(
  container: HTMLElement,
  store: CanvasStore,
  selection: { nodeId: string | null; pendingPort: string | null },
  handlers: CanvasHandlers,
): void {
  container.textContent = "";
  const SVG = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(SVG, "svg");
  svg.setAttribute("class", "canvas-svg");
  svg.setAttribute("width", "100%");
  svg.setAttribute("height", "100%");

  const statuses = new Map(
    (store.report?.nodes ?? []).map((n) => [n.id, n.status]));

  for (const edge of store.edges) {
    const srcRef = splitRef(edge.src);
    const dstRef = splitRef(edge.dst);
    const srcView = store.nodes.get(srcRef.node);
    const dstView = store.nodes.get(dstRef.node);
    if (!srcView || !dstView) continue;
    const srcPort = srcView.ports.find((p) => p.name === srcRef.port);
    const dstPort = dstView.ports.find((p) => p.name === dstRef.port);
    const a = srcPort ? portPosition(srcView, srcPort)
      : { x: srcView.position.x + NODE_WIDTH, y: srcView.position.y + HEADER };
    const b = dstPort ? portPosition(dstView, dstPort)
      : { x: dstView.position.x, y: dstView.position.y + HEADER };
    const path = document.createElementNS(SVG, "path");
    const bend = Math.max(40, (b.x - a.x) / 2);
    path.setAttribute("d",
      `M ${a.x} ${a.y} C ${a.x + bend} ${a.y}, ${b.x - bend} ${b.y}, ${b.x} ${b.y}`);
    path.setAttribute("class", "edge");
    path.setAttribute("data-edge", `${edge.src}->${edge.dst}`);
    svg.append(path);
  }

  for (const view of store.nodes.values()) {
    const group = document.createElementNS(SVG, "g");
    group.setAttribute("class", "node");
    group.setAttribute("data-node", view.id);
    const status = statuses.get(view.id);
    if (status) group.setAttribute("data-run-status", status);
    if (selection.nodeId === view.id) group.setAttribute("data-selected", "true");
    group.setAttribute("transform",
      `translate(${view.position.x}, ${view.position.y})`);

    const height = nodeHeight(view);
    const box = document.createElementNS(SVG, "rect");
    box.setAttribute("width", String(NODE_WIDTH));
    box.setAttribute("height", String(height));
    box.setAttribute("rx", "6");
    box.setAttribute("class", `node-box status-${status ?? "idle"}`);
    group.append(box);

    const title = document.createElementNS(SVG, "text");
    title.setAttribute("x", String(NODE_WIDTH / 2));
    title.setAttribute("y", "17");
    title.setAttribute("class", "node-title");
    title.setAttribute("text-anchor", "middle");
    title.textContent = `${view.label} (${view.id})`;
    group.append(title);

    for (const port of view.ports) {
      const position = portPosition(view, port);
      const local = { x: position.x - view.position.x, y: position.y - view.position.y };
      const ref = `${view.id}.${port.name}`;
      const dot = document.createElementNS(SVG, "circle");
      dot.setAttribute("cx", String(local.x));
      dot.setAttribute("cy", String(local.y));
      dot.setAttribute("r", "5");
      dot.setAttribute("class", `port ${port.direction}`);
      dot.setAttribute("data-port", ref);
      dot.setAttribute("data-port-type", typeLabel(port.datatype));
      if (selection.pendingPort === ref) dot.setAttribute("data-pending", "true");
      const rejection = store.attempts.find(
        (a) => a.verdict === "rejected" && (a.dst === ref || a.src === ref));
      if (rejection?.reason) {
        dot.setAttribute("data-rejected", rejection.reason.detail);
        const tip = document.createElementNS(SVG, "title");
        tip.textContent = `${rejection.reason.code}: ${rejection.reason.detail}`;
        dot.append(tip);
      }
      dot.addEventListener("click", (event) => {
        event.stopPropagation();
        handlers.onPortClick(ref, port.direction);
      });
      const label = document.createElementNS(SVG, "text");
      label.setAttribute("x", String(local.x + (port.direction === "uses" ? 10 : -10)));
      label.setAttribute("y", String(local.y + 4));
      label.setAttribute("class", "port-label");
      label.setAttribute("text-anchor", port.direction === "uses" ? "start" : "end");
      label.textContent = `${port.name}`;
      group.append(label, dot);
    }

    group.addEventListener("click", () => handlers.onNodeSelect(view.id));
    attachDrag(group, view, handlers);
    svg.append(group);
  }

  container.append(svg);
}

function attachDrag(group: SVGGElement, view: CanvasNodeView,
                    handlers: CanvasHandlers): void {
  let dragging: { startX: number; startY: number; baseX: number; baseY: number } | null = null;
  group.addEventListener("mousedown", (event) => {
    dragging = { startX: event.clientX, startY: event.clientY,
                 baseX: view.position.x, baseY: view.position.y };
    const move = (e: MouseEvent) => {
      if (!dragging) return;
      const x = dragging.baseX + (e.clientX - dragging.startX);
      const y = dragging.baseY + (e.clientY - dragging.startY);
      group.setAttribute("transform", `translate(${x}, ${y})`);
    };
    const up = (e: MouseEvent) => {
      window.removeEventListener("mousemove", move);
      window.removeEventListener("mouseup", up);
      if (!dragging) return;
      const x = dragging.baseX + (e.clientX - dragging.startX);
      const y = dragging.baseY + (e.clientY - dragging.startY);
      dragging = null;
      if (x !== view.position.x || y !== view.position.y) {
        handlers.onNodeMove(view.id, x, y);
      }
    };
    window.addEventListener("mousemove", move);
    window.addEventListener("mouseup", up);
  });
}

function splitRef(text: string): { node: string; port: string } {
  const cut = text.lastIndexOf(".");
  return { node: text.slice(0, cut), port: text.slice(cut + 1) };
}

// -- inspector and substitute dialog ----------------------------------------

export interface InspectorHandlers {
  onParamApply(nodeId: string, params: Record<string, string>): void;
  onOpenSubstitutes(nodeId: string): void;
  onDelete(nodeId: string): void;
}

export function renderInspector(
  container: HTMLElement,
  view: CanvasNodeView | null,
  handlers: InspectorHandlers,
): void {
  container.textContent = "";
  if (!view) {
    container.append(el("div", { class: "empty-state" }, ["select a node"]));
    return;
  }
  container.append(el("h3", {}, [`${view.label}`]),
                   el("div", { class: "inspector-meta" },
                      [`${view.component}@${view.version}`]),
                   el("div", { class: "inspector-summary" }, [view.summary]));

  const form = el("div", { class: "param-form" });
  const inputs = new Map<string, HTMLInputElement>();
  for (const [name, value] of Object.entries(view.params)) {
    const input = el("input", {
      class: "param-input",
      "data-param": name,
      value: view.paramDraft[name] ?? String(value),
    });
    input.addEventListener("input", () => {
      view.paramDraft[name] = input.value;
    });
    inputs.set(name, input);
    form.append(el("label", { class: "param-row" }, [`${name}: `, input]));
  }
  if (inputs.size > 0) {
    const apply = el("button", { class: "param-apply" }, ["apply params"]);
    apply.addEventListener("click", () => {
      const values: Record<string, string> = {};
      for (const [name, input] of inputs) values[name] = input.value;
      handlers.onParamApply(view.id, values);
    });
    form.append(apply);
  }
  container.append(form);

  const substitutes = el("button", { class: "open-substitutes" }, ["find substitutes"]);
  substitutes.addEventListener("click", () => handlers.onOpenSubstitutes(view.id));
  const remove = el("button", { class: "delete-node" }, ["remove node"]);
  remove.addEventListener("click", () => handlers.onDelete(view.id));
  container.append(el("div", { class: "inspector-actions" }, [substitutes, remove]));
}

export function renderSubstituteDialog(
  container: HTMLElement,
  nodeId: string,
  candidates: SubstituteEntry[] | null,
  rejection: { code: string; detail: string } | null,
  handlers: { onApply(candidate: SubstituteEntry): void; onClose(): void },
): void {
  container.textContent = "";
  if (candidates === null) {
    container.removeAttribute("data-open");
    return;
  }
  container.setAttribute("data-open", nodeId);
  const dialog = el("div", { class: "dialog", "data-dialog": "substitutes" });
  dialog.append(el("h3", {}, [`substitutes for ${nodeId}`]));
  if (rejection) {
    dialog.append(el("div", { class: "banner error", "data-replace-rejected": rejection.code },
                     [`${rejection.code}: ${rejection.detail}`]));
  }
  if (candidates.length === 0) {
    dialog.append(el("div", { class: "empty-state", "data-empty": "substitutes" },
                     ["no substitutes"]));
  } else {
    const list = el("ul", { class: "substitute-list" });
    candidates.forEach((candidate, index) => {
      const item = el("li", {
        class: "substitute-item",
        "data-substitute": String(index),
        "data-component": candidate.component,
        "data-version": candidate.version,
      }, [
        el("span", { class: "substitute-label" },
           [`${candidate.label} — ${candidate.component}@${candidate.version}`]),
        el("span", { class: "substitute-summary" }, [candidate.summary]),
      ]);
      const use = el("button", { class: "substitute-apply" }, ["replace"]);
      use.addEventListener("click", () => handlers.onApply(candidate));
      item.append(use);
      list.append(item);
    });
    dialog.append(list);
  }
  const close = el("button", { class: "dialog-close" }, ["close"]);
  close.addEventListener("click", () => handlers.onClose());
  dialog.append(close);
  container.append(dialog);
}

// -- run panel ---------------------------------------------------------------

export function renderRunPanel(
  container: HTMLElement,
  report: RunReportDoc | null,
  violations: Violation[] | null,
  handlers: { onRun(): void },
): void {
  container.textContent = "";
  const run = el("button", { class: "run-button" }, ["run project"]);
  run.addEventListener("click", () => handlers.onRun());
  container.append(el("div", { class: "run-header" }, [run]));

  if (violations) {
    const list = el("ul", { class: "violation-list", "data-violations": "true" });
    for (const violation of violations) {
      list.append(el("li", { class: "violation", "data-violation-code": violation.code },
                     [`${violation.code} at ${violation.path}: ${violation.detail}`]));
    }
    container.append(list);
    return;
  }
  if (!report) {
    container.append(el("div", { class: "empty-state" }, ["no run yet"]));
    return;
  }
  container.append(el("div", { class: "run-totals" },
    [`${report.totals.nodes} nodes in ${(report.totals.wall_ns / 1e6).toFixed(2)} ms`]));
  const table = el("table", { class: "run-table" });
  for (const node of report.nodes) {
    const outputs = Object.keys(node.outputs).sort().map((port) => {
      const cell = el("span", {
        class: "run-value",
        "data-run-value": `${node.id}.${port}`,
      }, [JSON.stringify(node.outputs[port])]);
      return el("span", { class: "run-output" }, [`${port}=`, cell, " "]);
    });
    const row = el("tr", {
      class: `run-row status-${node.status}`,
      "data-run-node": node.id,
      "data-run-status": node.status,
    }, [
      el("td", {}, [node.id]),
      el("td", { class: "run-status" }, [node.status]),
      el("td", {}, [`${((node.stop_ns - node.start_ns) / 1e6).toFixed(2)} ms`]),
      el("td", {}, outputs),
      el("td", { class: "run-error" },
         [node.error ? `${node.error.code}: ${node.error.detail}` : ""]),
    ]);
    table.append(row);
  }
  container.append(table);
}
