/**
 * Canvas state: a faithful mirror of the serve API's project document.
 *
 * The store holds one CanvasNodeView per project node (descriptor
 * summary, position, param editor state) plus the edge list, and can
 * serialize itself back into the exact project document.  Semantic
 * state changes only ever happen by adopting a document the server
 * returned; rejected gestures leave the mirror untouched and are kept
 * as ConnectionAttempt records for the canvas to display.
 */

import type {
  DescriptorDoc,
  EdgeEntry,
  LayoutDoc,
  NodeEntry,
  PortDoc,
  ProjectDoc,
  RunReportDoc,
  Scalar,
  Violation,
} from "./types.js";

export interface CanvasNodeView {
  id: string;
  component: string;
  version: string;
  params: Record<string, Scalar>;
  label: string;
  summary: string;
  ports: PortDoc[];
  position: { x: number; y: number };
  paramDraft: Record<string, string>; // editor state, uncommitted text
}

export interface ConnectionAttempt {
  src: string;
  dst: string;
  verdict: "pending" | "ok" | "rejected";
  reason?: Violation;
}

const GRID_X = 220;
const GRID_Y = 140;

export class CanvasStore {
  nodes = new Map<string, CanvasNodeView>();
  edges: EdgeEntry[] = [];
  meta = { title: "", description: "" };
  attempts: ConnectionAttempt[] = [];
  report: RunReportDoc | null = null;
  runViolations: Violation[] | null = null;
  descriptors = new Map<string, DescriptorDoc>(); // "name@version" -> descriptor
  banner: string | null = null;

  rememberDescriptor(descriptor: DescriptorDoc): void {
    this.descriptors.set(`${descriptor.name}@${descriptor.version}`, descriptor);
  }

  descriptorFor(component: string, version: string): DescriptorDoc | undefined {
    return this.descriptors.get(`${component}@${version}`);
  }

  /** Rebuild node views from a server document, keeping known positions. */
  adoptProject(doc: ProjectDoc, layout?: LayoutDoc): void {
    const previous = this.nodes;
    this.nodes = new Map();
    this.meta = { ...doc.meta };
    let index = 0;
    for (const id of Object.keys(doc.nodes)) {
      const entry = doc.nodes[id];
      const descriptor = this.descriptorFor(entry.component, entry.version);
      const kept = previous.get(id);
      const fromLayout = layout?.[id];
      this.nodes.set(id, {
        id,
        component: entry.component,
        version: entry.version,
        params: { ...entry.params },
        label: descriptor?.representation.label ?? entry.component.split(".").pop()!,
        summary: descriptor?.doc.summary ?? "",
        ports: descriptor?.ports ?? [],
        position: fromLayout ?? kept?.position ?? {
          x: 40 + (index % 4) * GRID_X,
          y: 40 + Math.floor(index / 4) * GRID_Y,
        },
        paramDraft: kept?.paramDraft ?? {},
      });
      index += 1;
    }
    this.edges = doc.edges.map((e) => ({ ...e }));
  }

  /** The canvas state as a project document; must equal the server's. */
  serializeProject(): ProjectDoc {
    const nodes: Record<string, NodeEntry> = {};
    for (const id of [...this.nodes.keys()].sort()) {
      const view = this.nodes.get(id)!;
      const params: Record<string, Scalar> = {};
      for (const key of Object.keys(view.params).sort()) {
        params[key] = view.params[key];
      }
      nodes[id] = { component: view.component, version: view.version, params };
    }
    return {
      meta: { ...this.meta },
      nodes,
      edges: this.edges.map((e) => ({ ...e })),
    };
  }

  layout(): LayoutDoc {
    const out: LayoutDoc = {};
    for (const [id, view] of this.nodes) {
      out[id] = { x: view.position.x, y: view.position.y };
    }
    return out;
  }

  recordAttempt(attempt: ConnectionAttempt): void {
    this.attempts = this.attempts.filter(
      (a) => !(a.src === attempt.src && a.dst === attempt.dst));
    this.attempts.push(attempt);
  }

  dropAttempt(src: string, dst: string): void {
    this.attempts = this.attempts.filter((a) => !(a.src === src && a.dst === dst));
  }

  lastRejection(): ConnectionAttempt | undefined {
    return [...this.attempts].reverse().find((a) => a.verdict === "rejected");
  }
}
