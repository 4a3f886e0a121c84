/**
 * Client-side mirror of the server model: ids, kinds, bench positions,
 * labels, and interaction endpoints, rebuilt entirely from service
 * responses.  The mirror exists so the canvas has something to draw;
 * it never computes physics and it is never trusted over the server
 * (picker selections, for one, always come from picker.eval).
 */

import { ServicePort } from "./client.js";
import { ScriptRunResult } from "./protocol.js";

export interface ModuleInfo {
  id: number;
  kind: string;
  family: "MAT" | "LIA" | "OBS";
  x: number;
  y: number;
  labels: string[];
}

export interface LinkInfo {
  lia: number;
  a: number | null;
  b: number | null;
}

const DUMP_SCRIPT =
  'foreach id [module list] { puts "$id [module kind $id] [bench pos $id]" }';

export class ModelMirror {
  modules = new Map<number, ModuleInfo>();
  links: LinkInfo[] = [];
  /** Server revision the mirror was last rebuilt at; -1 before the first. */
  revision = -1;
  private families = new Map<string, "MAT" | "LIA" | "OBS">();

  constructor(private client: ServicePort) {}

  /** Full rebuild from the service.  Safe to call repeatedly. */
  async refresh(): Promise<void> {
    if (this.families.size === 0) {
      await this.loadKindTable();
    }
    const dump = (await this.client.request("script.run", {
      source: DUMP_SCRIPT,
    })) as ScriptRunResult;

    const modules = new Map<number, ModuleInfo>();
    for (const line of dump.output) {
      const [idText, kind, xText, yText] = line.split(" ");
      const id = Number(idText);
      modules.set(id, {
        id,
        kind,
        family: this.families.get(kind) ?? "MAT",
        x: Number(xText),
        y: Number(yText),
        labels: [],
      });
    }

    const labels = (await this.client.request("script.run", {
      source: "label list",
    })) as ScriptRunResult;
    for (const line of labels.result ? labels.result.split("\n") : []) {
      // label text may not contain spaces but stay defensive: id is last
      const cut = line.lastIndexOf(" ");
      if (cut < 0) continue;
      const id = Number(line.slice(cut + 1));
      modules.get(id)?.labels.push(line.slice(0, cut));
    }

    const liaIds = [...modules.values()]
      .filter((m) => m.family === "LIA")
      .map((m) => m.id);
    const links: LinkInfo[] = [];
    if (liaIds.length > 0) {
      const ends = (await this.client.request("script.run", {
        source: `foreach id {${liaIds.join(" ")}} { puts "$id [link ends $id]" }`,
      })) as ScriptRunResult;
      for (const line of ends.output) {
        const [lia, a, b] = line.split(" ");
        links.push({
          lia: Number(lia),
          a: a === "-" ? null : Number(a),
          b: b === "-" ? null : Number(b),
        });
      }
    }

    this.modules = modules;
    this.links = links;
    this.revision = dump.revision;
  }

  positions(): { x: number; y: number }[] {
    return [...this.modules.values()];
  }

  has(id: number): boolean {
    return this.modules.has(id);
  }

  get(id: number): ModuleInfo | undefined {
    return this.modules.get(id);
  }

  get size(): number {
    return this.modules.size;
  }

  private async loadKindTable(): Promise<void> {
    const res = (await this.client.request("script.run", {
      source: "info kinds",
    })) as ScriptRunResult;
    for (const line of res.result.split("\n")) {
      const [kind, family] = line.split(" ");
      if (kind && (family === "MAT" || family === "LIA" || family === "OBS")) {
        this.families.set(kind, family);
      }
    }
  }
}
