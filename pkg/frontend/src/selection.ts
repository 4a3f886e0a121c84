/**
 * The selection set, fed by two routes: rubber-band gestures over the
 * mirrored layout (only where the current tier allows pointer work) and
 * picker expressions, which are always evaluated by the service so the
 * highlighted set is exactly what the server would say.
 */

import { ServiceCallError, ServicePort } from "./client.js";
import { Tier, tierCapabilities } from "./lod.js";
import { ModelMirror } from "./mirror.js";
import { PickerEvalResult } from "./protocol.js";
import { WorldRect, rectContains } from "./viewport.js";

export interface PickerOutcome {
  ok: boolean;
  /** Inline error text (picker syntax problems end up here, not thrown). */
  error?: string;
}

export class SelectionStore {
  private ids = new Set<number>();
  /** Revision the last picker selection was evaluated at. */
  pickerRevision = -1;
  lastPicker: string | null = null;

  constructor(private client: ServicePort) {}

  current(): number[] {
    return [...this.ids].sort((a, b) => a - b);
  }

  has(id: number): boolean {
    return this.ids.has(id);
  }

  get size(): number {
    return this.ids.size;
  }

  clear(): void {
    this.ids.clear();
    this.lastPicker = null;
  }

  toggle(id: number): void {
    if (this.ids.has(id)) this.ids.delete(id);
    else this.ids.add(id);
    this.lastPicker = null;
  }

  /**
   * Rubber-band over the mirrored module positions.  Disabled in the
   * density tier: at that zoom a pixel covers many modules, so pointer
   * selection is ambiguous by construction.  Returns a hint instead.
   */
  rubberBand(
    mirror: ModelMirror,
    tier: Tier,
    rect: WorldRect,
    additive = false,
  ): { ok: boolean; hint?: string } {
    if (!tierCapabilities(tier).pointerSelect) {
      return {
        ok: false,
        hint: "pointer selection is off at this zoom; use a picker expression",
      };
    }
    if (!additive) this.ids.clear();
    for (const mod of mirror.modules.values()) {
      if (rectContains(rect, mod.x, mod.y)) this.ids.add(mod.id);
    }
    this.lastPicker = null;
    return { ok: true };
  }

  /**
   * Select by picker expression.  The ids come verbatim from the
   * service's picker.eval, which is the coherence invariant: the UI
   * never re-implements label matching.
   */
  async byPicker(expr: string): Promise<PickerOutcome> {
    try {
      const res = (await this.client.request("picker.eval", {
        expr,
      })) as PickerEvalResult;
      this.ids = new Set(res.ids);
      this.lastPicker = expr;
      return { ok: true };
    } catch (err) {
      if (err instanceof ServiceCallError) {
        return { ok: false, error: err.message };
      }
      throw err;
    }
  }
}
