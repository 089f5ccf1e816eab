/**
 * Studio application: wires the serve API, the canvas store, and the
 * DOM views together.
 *
 * All semantics stay server-side.  A gesture first goes to the API;
 * only a confirming response mutates the mirror and re-renders
 * (optimistic rendering of semantic actions is deliberately absent).
 * Rejections render the server's verdict verbatim; transport failures
 * cancel the gesture, show a banner, and leave the project unchanged.
 */

import { ApiHttpError, ServeApi } from "./api.js";
import { CanvasStore } from "./store.js";
import type { RegistryRecordDoc, SubstituteEntry } from "./types.js";
import {
  el,
  renderCanvas,
  renderInspector,
  renderPalette,
  renderRunPanel,
  renderSubstituteDialog,
} from "./views.js";

interface Sections {
  palette: HTMLElement;
  canvas: HTMLElement;
  inspector: HTMLElement;
  runPanel: HTMLElement;
  dialog: HTMLElement;
  status: HTMLElement;
}

export class StudioApp {
  readonly store = new CanvasStore();
  private sections: Sections;
  private paletteRecords: RegistryRecordDoc[] = [];
  private paletteQuery = "";
  private paletteOffline = false;
  private selectedNode: string | null = null;
  private pendingPort: string | null = null;
  private substitutesFor: string | null = null;
  private substituteCandidates: SubstituteEntry[] | null = null;
  private replaceRejection: { code: string; detail: string } | null = null;

  constructor(root: HTMLElement, private readonly api: ServeApi) {
    root.textContent = "";
    this.sections = {
      palette: el("aside", { class: "palette", "data-section": "palette" }),
      canvas: el("main", { class: "canvas", "data-section": "canvas" }),
      inspector: el("aside", { class: "inspector", "data-section": "inspector" }),
      runPanel: el("footer", { class: "run-panel", "data-section": "run-panel" }),
      dialog: el("div", { class: "dialog-host", "data-section": "dialog" }),
      status: el("div", { class: "status-bar", "data-section": "status" }),
    };
    const middle = el("div", { class: "studio-middle" },
                      [this.sections.palette, this.sections.canvas,
                       this.sections.inspector]);
    root.append(el("div", { class: "studio" },
                   [this.sections.status, middle, this.sections.runPanel,
                    this.sections.dialog]));
  }

  async init(): Promise<void> {
    await this.paletteSearch("");
    const project = await this.api.getProject();
    await this.hydrateDescriptors(Object.values(project.nodes)
      .map((n) => ({ component: n.component, version: n.version })));
    let layout = {};
    try {
      layout = await this.api.getLayout();
    } catch {
      // layout sidecar is optional
    }
    this.store.adoptProject(project, layout);
    this.render();
  }

  // -- palette --------------------------------------------------------------

  async paletteSearch(text: string): Promise<void> {
    this.paletteQuery = text;
    try {
      this.paletteRecords = await this.api.searchRegistry(
        text ? { text } : { text: "" });
      this.paletteOffline = false;
      for (const record of this.paletteRecords) {
        this.store.rememberDescriptor(record.descriptor);
      }
    } catch (error) {
      this.paletteRecords = [];
      this.paletteOffline = !(error instanceof ApiHttpError);
      this.setBanner(error instanceof ApiHttpError
        ? `search refused: ${error.detail}` : "registry unreachable");
    }
    this.render();
  }

  async addComponent(record: RegistryRecordDoc): Promise<void> {
    const base = record.descriptor.name.split(".").pop() ?? "node";
    let id = base;
    let suffix = 2;
    while (this.store.nodes.has(id)) {
      id = `${base}${suffix}`;
      suffix += 1;
    }
    const params: Record<string, string | number | boolean> = {};
    for (const param of record.descriptor.params) {
      if (param.default !== undefined) params[param.name] = param.default;
    }
    try {
      const doc = await this.api.addNode(id, record.descriptor.name,
                                         record.descriptor.version, params);
      this.store.rememberDescriptor(record.descriptor);
      this.store.adoptProject(doc);
      this.selectedNode = id;
      await this.saveLayout();
    } catch (error) {
      this.setBanner(describe(error));
    }
    this.render();
  }

  // -- connect gesture --------------------------------------------------------

  async portClicked(ref: string, direction: "uses" | "provides"): Promise<void> {
    if (this.pendingPort === null) {
      if (direction === "provides") {
        this.pendingPort = ref;
        this.render();
      }
      return;
    }
    if (this.pendingPort === ref) {
      this.pendingPort = null;
      this.render();
      return;
    }
    if (direction !== "uses") {
      this.pendingPort = ref; // restart from another source
      this.render();
      return;
    }
    const src = this.pendingPort;
    this.pendingPort = null;
    await this.connectGesture(src, ref);
  }

  async connectGesture(src: string, dst: string): Promise<void> {
    this.store.recordAttempt({ src, dst, verdict: "pending" });
    this.render();
    try {
      const result = await this.api.addEdge({ src, dst });
      if (result.ok) {
        this.store.recordAttempt({ src, dst, verdict: "ok" });
        this.store.adoptProject(result.project);
      } else {
        this.store.recordAttempt({ src, dst, verdict: "rejected",
                                   reason: result.violation });
        this.setBanner(`${result.violation.code}: ${result.violation.detail}`);
      }
    } catch (error) {
      // transport failure: gesture cancelled, project untouched
      this.store.dropAttempt(src, dst);
      this.setBanner(describe(error));
    }
    this.render();
  }

  // -- substitutes -------------------------------------------------------------

  async openSubstitutes(nodeId: string): Promise<void> {
    this.substitutesFor = nodeId;
    this.replaceRejection = null;
    try {
      this.substituteCandidates = await this.api.substitutes(nodeId);
    } catch (error) {
      this.substituteCandidates = [];
      this.setBanner(describe(error));
    }
    this.render();
  }

  async applySubstitute(candidate: SubstituteEntry): Promise<void> {
    if (this.substitutesFor === null) return;
    const nodeId = this.substitutesFor;
    try {
      const result = await this.api.replaceNode(nodeId, candidate.component,
                                                candidate.version);
      if (result.ok) {
        const descriptor = this.paletteRecords.find(
          (r) => r.descriptor.name === candidate.component
              && r.descriptor.version === candidate.version)?.descriptor;
        if (descriptor) this.store.rememberDescriptor(descriptor);
        else await this.hydrateDescriptors([candidate]);
        this.store.adoptProject(result.project);
        this.closeSubstitutes();
      } else {
        this.replaceRejection = { code: result.rejection.code,
                                  detail: result.rejection.detail };
      }
    } catch (error) {
      this.setBanner(describe(error));
    }
    this.render();
  }

  closeSubstitutes(): void {
    this.substitutesFor = null;
    this.substituteCandidates = null;
    this.replaceRejection = null;
    this.render();
  }

  // -- params, delete, layout ---------------------------------------------------

  async applyParams(nodeId: string, raw: Record<string, string>): Promise<void> {
    const view = this.store.nodes.get(nodeId);
    if (!view) return;
    const params: Record<string, string | number | boolean> = {};
    for (const [name, text] of Object.entries(raw)) {
      params[name] = coerceScalar(text);
    }
    try {
      const doc = await this.api.setParams(nodeId, params);
      view.paramDraft = {};
      this.store.adoptProject(doc);
    } catch (error) {
      this.setBanner(describe(error));
    }
    this.render();
  }

  async deleteNode(nodeId: string): Promise<void> {
    try {
      const doc = await this.api.deleteNode(nodeId);
      if (this.selectedNode === nodeId) this.selectedNode = null;
      this.store.adoptProject(doc);
      await this.saveLayout();
    } catch (error) {
      this.setBanner(describe(error));
    }
    this.render();
  }

  async moveNode(nodeId: string, x: number, y: number): Promise<void> {
    const view = this.store.nodes.get(nodeId);
    if (!view) return;
    view.position = { x, y };
    await this.saveLayout();
    this.render();
  }

  private async saveLayout(): Promise<void> {
    try {
      await this.api.putLayout(this.store.layout());
    } catch {
      // positions are UI-local state; losing them is not a project change
    }
  }

  // -- run -----------------------------------------------------------------------

  async runProject(): Promise<void> {
    try {
      const result = await this.api.runProject();
      if (result.ok) {
        this.store.report = result.report;
        this.store.runViolations = null;
      } else {
        this.store.report = null;
        this.store.runViolations = result.violations;
      }
    } catch (error) {
      this.setBanner(describe(error));
    }
    this.render();
  }

  // -- rendering --------------------------------------------------------------------

  setBanner(text: string | null): void {
    this.store.banner = text;
  }

  render(): void {
    renderPalette(this.sections.palette, this.paletteRecords,
                  { query: this.paletteQuery, offline: this.paletteOffline },
                  {
                    onSearch: (text) => void this.paletteSearch(text),
                    onAdd: (record) => void this.addComponent(record),
                  });
    renderCanvas(this.sections.canvas, this.store,
                 { nodeId: this.selectedNode, pendingPort: this.pendingPort },
                 {
                   onPortClick: (ref, direction) => void this.portClicked(ref, direction),
                   onNodeSelect: (id) => {
                     this.selectedNode = id;
                     this.render();
                   },
                   onNodeMove: (id, x, y) => void this.moveNode(id, x, y),
                 });
    renderInspector(this.sections.inspector,
                    this.selectedNode ? this.store.nodes.get(this.selectedNode) ?? null
                                      : null,
                    {
                      onParamApply: (id, params) => void this.applyParams(id, params),
                      onOpenSubstitutes: (id) => void this.openSubstitutes(id),
                      onDelete: (id) => void this.deleteNode(id),
                    });
    renderSubstituteDialog(this.sections.dialog, this.substitutesFor ?? "",
                           this.substitutesFor === null ? null
                             : this.substituteCandidates ?? [],
                           this.replaceRejection,
                           {
                             onApply: (candidate) => void this.applySubstitute(candidate),
                             onClose: () => this.closeSubstitutes(),
                           });
    renderRunPanel(this.sections.runPanel, this.store.report,
                   this.store.runViolations, { onRun: () => void this.runProject() });
    this.sections.status.textContent = this.store.banner ?? "";
    this.sections.status.setAttribute("data-banner-text", this.store.banner ?? "");
  }

  private async hydrateDescriptors(
    refs: { component: string; version: string }[],
  ): Promise<void> {
    for (const ref of refs) {
      if (this.store.descriptorFor(ref.component, ref.version)) continue;
      try {
        const hits = await this.api.searchRegistry({ text: ref.component });
        for (const record of hits) {
          this.store.rememberDescriptor(record.descriptor);
        }
      } catch {
        // node renders without port markers until the descriptor is known
      }
    }
  }
}

function coerceScalar(text: string): string | number | boolean {
  const trimmed = text.trim();
  if (trimmed === "true") return true;
  if (trimmed === "false") return false;
  if (trimmed !== "" && !Number.isNaN(Number(trimmed))) return Number(trimmed);
  return text;
}

function describe(error: unknown): string {
  if (error instanceof ApiHttpError) return `${error.code}: ${error.detail}`;
  return error instanceof Error ? error.message : String(error);
}
