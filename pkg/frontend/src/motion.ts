/**
 * Motion playback: the recorded displacement trace replayed over the
 * workbench layout.  Displacement is along the movement axis, which is
 * perpendicular to the bench plane, so a frame renders as per-module
 * color plus a small vertical offset rather than a changed position.
 */

import { ServicePort } from "./client.js";
import { TraceResult } from "./protocol.js";

export class MotionTrace {
  decimation = 1;
  rate = 0;
  matIds: number[] = [];
  frames: number[][] = [];
  total = 0;

  constructor(private client: ServicePort) {}

  get loaded(): boolean {
    return this.frames.length > 0;
  }

  async load(): Promise<void> {
    const res = (await this.client.request("result.trace", {})) as TraceResult;
    this.decimation = res.decimation;
    this.rate = res.rate;
    this.matIds = res.mat_ids;
    this.frames = res.frames;
    this.total = res.total;
  }

  /** Trace frame for a playhead step: floor(step / decimation), clamped. */
  frameIndexFor(step: number): number {
    const idx = Math.floor(step / this.decimation);
    return Math.min(Math.max(idx, 0), Math.max(this.frames.length - 1, 0));
  }

  /** Displacements by module id at a step, or null when nothing loaded. */
  displacementsAt(step: number): Map<number, number> | null {
    if (!this.loaded) return null;
    const row = this.frames[this.frameIndexFor(step)];
    const out = new Map<number, number>();
    for (let i = 0; i < this.matIds.length; i++) {
      out.set(this.matIds[i], row[i]);
    }
    return out;
  }

  /** Largest |displacement| across the whole trace, for display scaling. */
  peak(): number {
    let peak = 0;
    for (const row of this.frames) {
      for (const v of row) {
        const a = Math.abs(v);
        if (a > peak) peak = a;
      }
    }
    return peak;
  }
}

/** Screen offset for a displacement, clamped to +-maxPx. */
export function displacementOffsetPx(
  value: number,
  peak: number,
  maxPx: number,
): number {
  if (peak <= 0) return 0;
  const scaled = (value / peak) * maxPx;
  return Math.min(Math.max(scaled, -maxPx), maxPx);
}

/**
 * Diverging color for a displacement: blue below rest, red above,
 * saturating at the trace peak.
 */
export function displacementColor(value: number, peak: number): string {
  if (peak <= 0) return "rgb(128,128,128)";
  const t = Math.min(Math.max(value / peak, -1), 1);
  const r = Math.round(128 + 100 * Math.max(t, 0) - 60 * Math.max(-t, 0));
  const g = Math.round(128 - 60 * Math.abs(t));
  const b = Math.round(128 + 100 * Math.max(-t, 0) - 60 * Math.max(t, 0));
  return `rgb(${r},${g},${b})`;
}
