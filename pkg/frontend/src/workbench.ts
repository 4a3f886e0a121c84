/**
 * The workbench shell: one session client, the mirrored model, the
 * viewport, selection, pending edits, and the simulation window, tied
 * together behind a render-agnostic API.  A host (the browser app, or
 * a test) pulls draw lists; it never reaches past this class to the
 * wire.
 *
 * Message handling and rendering are decoupled: events only mark state
 * dirty and poke the host's scheduler; drawing happens whenever the
 * host gets around to it.
 */

import { SessionClient, ServiceCallError } from "./client.js";
import { EditQueue } from "./edits.js";
import { Tier, computeLod, glyphPx, tierCapabilities } from "./lod.js";
import { ModelMirror, ModuleInfo } from "./mirror.js";
import { NoteAction, parseNoteLink, sanitizeNoteHtml } from "./notes.js";
import {
  InfoStatsResult,
  ScriptRunResult,
  SessionEvent,
  SimFinishedPayload,
  SimProgressPayload,
  SimStartResult,
} from "./protocol.js";
import { SelectionStore } from "./selection.js";
import { SimulationView } from "./simview.js";
import {
  Viewport,
  WorldRect,
  countVisible,
  pan,
  screenToWorld,
  visibleRect,
  worldToScreen,
  zoomAt,
} from "./viewport.js";

export interface GlyphDraw {
  id: number;
  kind: string;
  family: string;
  xPx: number;
  yPx: number;
  sizePx: number;
  selected: boolean;
  /** First user label, shown only in the detail tier. */
  label: string | null;
}

export interface LinkDraw {
  lia: number;
  x0Px: number;
  y0Px: number;
  x1Px: number;
  y1Px: number;
  selected: boolean;
}

/** One shaded cell of the density tier. */
export interface DensityCell {
  xPx: number;
  yPx: number;
  sizePx: number;
  count: number;
}

export interface SimProgress {
  running: boolean;
  done: number;
  total: number;
  error: string | null;
}

export interface WorkbenchOptions {
  widthPx: number;
  heightPx: number;
  /** Called at most once per dirty cycle; host schedules actual drawing. */
  requestRender?: () => void;
}

export class Workbench {
  readonly mirror: ModelMirror;
  readonly selection: SelectionStore;
  readonly edits: EditQueue;
  readonly sim: SimulationView;
  viewport: Viewport = { centerX: 0, centerY: 0, zoom: 32, visible: 0, total: 0 };
  widthPx: number;
  heightPx: number;
  progress: SimProgress = { running: false, done: 0, total: 0, error: null };
  /** Sanitized note html by note id, for the notes panel. */
  notes = new Map<number, string>();
  statusLine = "";

  private requestRender: () => void;
  private dirty = false;
  private refreshing: Promise<void> | null = null;
  private unsubscribe: () => void;
  /** Bumped on sim-finished/failed; lets sim.start lose the race cleanly. */
  private simEpoch = 0;

  constructor(readonly client: SessionClient, options: WorkbenchOptions) {
    this.widthPx = options.widthPx;
    this.heightPx = options.heightPx;
    this.requestRender = options.requestRender ?? (() => {});
    this.mirror = new ModelMirror(client);
    this.selection = new SelectionStore(client);
    this.edits = new EditQueue(client, () => this.refresh());
    this.sim = new SimulationView(client);
    this.unsubscribe = client.onEvent((ev) => this.handleEvent(ev));
  }

  dispose(): void {
    this.unsubscribe();
  }

  // -- model state ----------------------------------------------------------

  /** Re-fetch server truth and recompute the visible count. */
  async refresh(): Promise<void> {
    // collapse concurrent callers onto one fetch
    if (!this.refreshing) {
      this.refreshing = this.mirror
        .refresh()
        .finally(() => (this.refreshing = null));
    }
    await this.refreshing;
    this.updateVisible();
    this.invalidate();
  }

  async openModel(path: string): Promise<void> {
    await this.client.request("model.load", { path });
    this.selection.clear();
    await this.refresh();
    await this.refreshNotes();
  }

  async saveModel(path: string): Promise<number> {
    const res = (await this.client.request("model.save", { path })) as {
      bytes: number;
    };
    return res.bytes;
  }

  async runScript(source: string): Promise<ScriptRunResult> {
    try {
      const res = (await this.client.request("script.run", {
        source,
      })) as ScriptRunResult;
      if (res.revision !== this.mirror.revision) await this.refresh();
      return res;
    } catch (err) {
      // failed scripts may still have edited the model before stopping
      await this.refresh();
      throw err;
    }
  }

  async refreshNotes(): Promise<void> {
    const listed = (await this.client.request("script.run", {
      source: "note list",
    })) as ScriptRunResult;
    const notes = new Map<number, string>();
    for (const idText of listed.result ? listed.result.split(" ") : []) {
      const got = (await this.client.request("script.run", {
        source: `note get ${idText}`,
      })) as ScriptRunResult;
      notes.set(Number(idText), sanitizeNoteHtml(got.result));
    }
    this.notes = notes;
    this.invalidate();
  }

  // -- viewport -------------------------------------------------------------

  get tier(): Tier {
    return computeLod(this.viewport);
  }

  panBy(dxPx: number, dyPx: number): void {
    this.viewport = pan(this.viewport, dxPx, dyPx);
    this.updateVisible();
    this.invalidate();
  }

  zoomBy(factor: number, anchorPx: number, anchorPy: number): void {
    this.viewport = zoomAt(
      this.viewport, factor, anchorPx, anchorPy, this.widthPx, this.heightPx,
    );
    this.updateVisible();
    this.invalidate();
  }

  goTo(x: number, y: number, zoom: number | null): void {
    this.viewport = {
      ...this.viewport,
      centerX: x,
      centerY: y,
      zoom: zoom ?? this.viewport.zoom,
    };
    this.updateVisible();
    this.invalidate();
  }

  resize(widthPx: number, heightPx: number): void {
    this.widthPx = widthPx;
    this.heightPx = heightPx;
    this.updateVisible();
    this.invalidate();
  }

  private updateVisible(): void {
    const rect = visibleRect(this.viewport, this.widthPx, this.heightPx);
    this.viewport = {
      ...this.viewport,
      visible: countVisible(this.mirror.positions(), rect),
      total: this.mirror.size,
    };
  }

  // -- selection ------------------------------------------------------------

  /** Rubber band between two screen corners, honoring the tier rules. */
  rubberBandPx(
    x0: number, y0: number, x1: number, y1: number, additive = false,
  ): { ok: boolean; hint?: string } {
    const a = screenToWorld(
      this.viewport, Math.min(x0, x1), Math.min(y0, y1), this.widthPx, this.heightPx,
    );
    const b = screenToWorld(
      this.viewport, Math.max(x0, x1), Math.max(y0, y1), this.widthPx, this.heightPx,
    );
    const rect: WorldRect = { x0: a.x, y0: a.y, x1: b.x, y1: b.y };
    const result = this.selection.rubberBand(this.mirror, this.tier, rect, additive);
    this.statusLine = result.hint ?? "";
    this.invalidate();
    return result;
  }

  async selectByPicker(expr: string): Promise<boolean> {
    const outcome = await this.selection.byPicker(expr);
    this.statusLine = outcome.ok ? "" : outcome.error ?? "";
    this.invalidate();
    return outcome.ok;
  }

  // -- simulation -----------------------------------------------------------

  async startSimulation(durationSteps?: number): Promise<SimStartResult> {
    const epoch = this.simEpoch;
    const res = (await this.client.request(
      "sim.start",
      durationSteps === undefined ? {} : { duration: durationSteps },
    )) as SimStartResult;
    // A short run can finish before its start response arrives; the
    // terminal event already wrote the truth then, so keep it.
    if (this.simEpoch === epoch) {
      this.progress = { running: true, done: 0, total: res.steps, error: null };
    }
    this.invalidate();
    return res;
  }

  async cancelSimulation(): Promise<void> {
    await this.client.request("sim.cancel", {});
  }

  async stats(): Promise<InfoStatsResult> {
    return (await this.client.request("info.stats", {})) as InfoStatsResult;
  }

  // -- notes ----------------------------------------------------------------

  /** Route a clicked note link; external URLs go to the host callback. */
  async dispatchNoteLink(
    href: string,
    openExternal: (url: string) => void,
  ): Promise<NoteAction | null> {
    const action = parseNoteLink(href);
    if (!action) return null;
    switch (action.kind) {
      case "select":
        await this.selectByPicker(action.picker);
        break;
      case "goto":
        this.goTo(action.x, action.y, action.zoom);
        break;
      case "run":
        await this.runScript(action.script);
        break;
      case "external":
        openExternal(action.url);
        break;
    }
    return action;
  }

  // -- draw lists -----------------------------------------------------------

  /** Per-module glyphs for the current tier; empty in density tier. */
  glyphs(): GlyphDraw[] {
    const tier = this.tier;
    if (!tierCapabilities(tier).pointerSelect) return [];
    const size = glyphPx(this.viewport);
    const out: GlyphDraw[] = [];
    const rect = visibleRect(this.viewport, this.widthPx, this.heightPx);
    const pad = 1 / this.viewport.zoom; // glyphs straddling the edge
    for (const mod of this.mirror.modules.values()) {
      if (
        mod.x < rect.x0 - pad || mod.x > rect.x1 + pad ||
        mod.y < rect.y0 - pad || mod.y > rect.y1 + pad
      ) {
        continue;
      }
      const p = worldToScreen(this.viewport, mod.x, mod.y, this.widthPx, this.heightPx);
      out.push({
        id: mod.id,
        kind: mod.kind,
        family: mod.family,
        xPx: p.x,
        yPx: p.y,
        sizePx: size,
        selected: this.selection.has(mod.id),
        label: tier === "detail" ? mod.labels[0] ?? null : null,
      });
    }
    return out;
  }

  links(): LinkDraw[] {
    if (this.tier === "density") return [];
    const out: LinkDraw[] = [];
    for (const link of this.mirror.links) {
      if (link.a === null || link.b === null) continue;
      const a = this.mirror.get(link.a);
      const b = this.mirror.get(link.b);
      if (!a || !b) continue;
      const p0 = worldToScreen(this.viewport, a.x, a.y, this.widthPx, this.heightPx);
      const p1 = worldToScreen(this.viewport, b.x, b.y, this.widthPx, this.heightPx);
      out.push({
        lia: link.lia,
        x0Px: p0.x,
        y0Px: p0.y,
        x1Px: p1.x,
        y1Px: p1.y,
        selected: this.selection.has(link.lia),
      });
    }
    return out;
  }

  /** Density-tier shading: module counts over a screen-space grid. */
  densityCells(cellPx = 8): DensityCell[] {
    if (this.tier !== "density") return [];
    const counts = new Map<string, DensityCell>();
    for (const mod of this.mirror.modules.values()) {
      const p = worldToScreen(this.viewport, mod.x, mod.y, this.widthPx, this.heightPx);
      if (p.x < -cellPx || p.x > this.widthPx + cellPx) continue;
      if (p.y < -cellPx || p.y > this.heightPx + cellPx) continue;
      const cx = Math.floor(p.x / cellPx);
      const cy = Math.floor(p.y / cellPx);
      const key = `${cx},${cy}`;
      const cell = counts.get(key);
      if (cell) {
        cell.count++;
      } else {
        counts.set(key, { xPx: cx * cellPx, yPx: cy * cellPx, sizePx: cellPx, count: 1 });
      }
    }
    return [...counts.values()];
  }

  // -- events ---------------------------------------------------------------

  /** Pop the dirty flag; hosts call this from their render loop. */
  consumeDirty(): boolean {
    const was = this.dirty;
    this.dirty = false;
    return was;
  }

  private invalidate(): void {
    if (!this.dirty) {
      this.dirty = true;
      this.requestRender();
    }
  }

  private handleEvent(ev: SessionEvent): void {
    switch (ev.event) {
      case "model-changed":
        // Our own edits already updated the mirror optimistically; a
        // change we did not send means another writer is on the
        // session, so re-fetch (queued edits then replay on top).
        if (!this.edits.busy && ev.revision !== this.mirror.revision) {
          void this.refresh();
        }
        break;
      case "sim-progress": {
        const p = ev.payload as unknown as SimProgressPayload;
        this.progress = { running: true, done: p.done, total: p.total, error: null };
        break;
      }
      case "sim-finished": {
        this.simEpoch++;
        const done = (ev.payload as unknown as SimFinishedPayload).stats.steps;
        this.progress = { running: false, done, total: done, error: null };
        void this.sim.attachToLastRun();
        break;
      }
      case "sim-failed": {
        this.simEpoch++;
        const message = String(ev.payload.message ?? ev.payload.type ?? "failed");
        this.progress = { ...this.progress, running: false, error: message };
        // a partial result may still be inspectable
        void this.sim.attachToLastRun().catch(() => {});
        break;
      }
    }
    this.invalidate();
  }
}

export { ServiceCallError };
