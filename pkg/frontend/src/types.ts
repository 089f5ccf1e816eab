/**
 * Wire types of the serve API, mirrored verbatim.
 *
 * The studio never interprets these beyond display: every semantic
 * verdict (compatibility, substitutability, validity, run outcomes)
 * arrives in one of these payloads and is rendered as received.
 */

export type Scalar = number | boolean | string;

export interface ProjectMeta {
  title: string;
  description: string;
}

export interface NodeEntry {
  component: string;
  version: string;
  params: Record<string, Scalar>;
}

export interface EdgeEntry {
  src: string; // "nodeId.port"
  dst: string;
}

export interface ProjectDoc {
  meta: ProjectMeta;
  nodes: Record<string, NodeEntry>;
  edges: EdgeEntry[];
}

export interface Violation {
  code: string;
  path: string;
  detail: string;
}

export interface SubstReport {
  name: string;
  kind: string;
  ok: boolean;
  reason: string;
}

/** 409 body of a refused replace: the violation plus per-port reports. */
export interface ReplaceRejection extends Violation {
  reports?: SubstReport[];
}

export interface SubstituteEntry {
  component: string;
  version: string;
  summary: string;
  label: string;
  download_count: number;
}

export interface DataTypeDoc {
  kind: string;
  element?: DataTypeDoc;
  rank?: number;
  extents?: (number | null)[];
  fields?: Record<string, DataTypeDoc>;
  name?: string;
  version?: string;
}

export interface PortDoc {
  name: string;
  direction: "uses" | "provides";
  datatype: DataTypeDoc;
  required?: boolean;
  doc?: string;
}

export interface ParamDoc {
  name: string;
  datatype: DataTypeDoc;
  default?: Scalar;
  doc?: string;
}

export interface DescriptorDoc {
  name: string;
  version: string;
  kind: "elementary" | "compound";
  doc: { summary: string; description: string; authors: string[] };
  tags: string[];
  ports: PortDoc[];
  params: ParamDoc[];
  behavior: { deterministic: boolean; stateful: boolean };
  representation: { label: string; category: string };
  implementation?: unknown;
  composition?: unknown;
}

export interface RegistryRecordDoc {
  descriptor: DescriptorDoc;
  artifact_url: string;
  published_at: string;
  download_count: number;
  publisher: string;
}

export type WireValue =
  | Scalar
  | { shape: number[]; data: unknown[] }
  | { [field: string]: unknown };

export interface RunNodeDoc {
  id: string;
  start_ns: number;
  stop_ns: number;
  status: "ok" | "error" | "skipped";
  outputs: Record<string, WireValue>;
  error?: { code: string; detail: string };
}

export interface RunReportDoc {
  project_hash: string;
  totals: { wall_ns: number; nodes: number };
  nodes: RunNodeDoc[];
}

export interface LayoutDoc {
  [nodeId: string]: { x: number; y: number };
}

/** A port on the canvas, "nodeId.port" on the wire. */
export interface PortRef {
  node: string;
  port: string;
}

export function portRefToString(ref: PortRef): string {
  return `${ref.node}.${ref.port}`;
}

export function parsePortRef(text: string): PortRef {
  const cut = text.lastIndexOf(".");
  if (cut <= 0 || cut === text.length - 1) {
    throw new Error(`malformed port reference: ${text}`);
  }
  return { node: text.slice(0, cut), port: text.slice(cut + 1) };
}
