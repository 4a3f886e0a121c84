/**
 * Waveform rendering data: min/max column decimation of a channel.
 *
 * Samples are held as Float32Array.  The exported WAV is float32 and
 * float64-to-float32 rounding is monotone, so min/max computed here
 * match a decimation of the file bit for bit; the fidelity test leans
 * on that.
 */

import { ServicePort } from "./client.js";
import { WaveResult } from "./protocol.js";

export interface Column {
  min: number;
  max: number;
}

/**
 * Min/max per pixel column over samples[start:end).  Column i covers
 * the half-open slice [floor(i*n/width), floor((i+1)*n/width)) of the
 * window, widened to at least one sample so a zoomed-in column repeats
 * its nearest sample instead of vanishing.
 */
export function buildColumns(
  samples: ArrayLike<number>,
  width: number,
  start = 0,
  end = samples.length,
): Column[] {
  if (width <= 0 || end <= start) return [];
  const n = end - start;
  const out: Column[] = new Array(width);
  for (let i = 0; i < width; i++) {
    let lo = start + Math.floor((i * n) / width);
    let hi = start + Math.floor(((i + 1) * n) / width);
    if (hi <= lo) hi = lo + 1;
    if (hi > end) hi = end;
    if (lo >= end) lo = end - 1;
    let min = samples[lo];
    let max = samples[lo];
    for (let j = lo + 1; j < hi; j++) {
      const v = samples[j];
      if (v < min) min = v;
      if (v > max) max = v;
    }
    out[i] = { min, max };
  }
  return out;
}

interface Range {
  start: number;
  end: number;
}

function mergeRanges(ranges: Range[]): Range[] {
  const sorted = [...ranges].sort((a, b) => a.start - b.start);
  const out: Range[] = [];
  for (const r of sorted) {
    const last = out[out.length - 1];
    if (last && r.start <= last.end) {
      last.end = Math.max(last.end, r.end);
    } else {
      out.push({ ...r });
    }
  }
  return out;
}

/** How many samples one result.wave request may carry. */
const FETCH_CHUNK = 262144;

/**
 * One channel of a finished (or partial) run, fetched lazily.  Keeps a
 * sparse sample buffer plus the list of loaded ranges so scrubbing far
 * into a long render does not pull the whole file.
 */
export class WaveChannel {
  readonly name: string;
  rate = 0;
  total = 0;
  private samples = new Float32Array(0);
  private loaded: Range[] = [];

  constructor(private client: ServicePort, name: string) {
    this.name = name;
  }

  loadedRanges(): { start: number; end: number }[] {
    return this.loaded.map((r) => ({ ...r }));
  }

  isLoaded(start: number, end: number): boolean {
    return this.loaded.some((r) => r.start <= start && end <= r.end);
  }

  /** Fetch [start:end) unless already resident. */
  async ensure(start: number, end: number): Promise<void> {
    start = Math.max(0, start);
    if (this.total > 0) end = Math.min(end, this.total);
    if (end <= start || this.isLoaded(start, end)) return;
    for (let at = start; at < end; at += FETCH_CHUNK) {
      const count = Math.min(FETCH_CHUNK, end - at);
      const res = (await this.client.request("result.wave", {
        channel: this.name,
        start: at,
        count,
      })) as WaveResult;
      this.absorb(res);
      if (res.start + res.samples.length >= res.total) break;
    }
  }

  async ensureAll(): Promise<void> {
    if (this.total === 0) {
      // length unknown until the first response arrives
      const res = (await this.client.request("result.wave", {
        channel: this.name,
        start: 0,
        count: FETCH_CHUNK,
      })) as WaveResult;
      this.absorb(res);
    }
    await this.ensure(0, this.total);
  }

  /**
   * Columns for the sample window [start:end).  Unloaded stretches
   * render as silent; callers wanting exact pixels call ensure() first.
   */
  columns(width: number, start = 0, end = this.total): Column[] {
    return buildColumns(this.samples, width, start, Math.min(end, this.total));
  }

  sample(index: number): number {
    return index >= 0 && index < this.total ? this.samples[index] : 0;
  }

  private absorb(res: WaveResult): void {
    this.rate = res.rate;
    if (res.total !== this.total) {
      const grown = new Float32Array(res.total);
      grown.set(this.samples.subarray(0, Math.min(this.samples.length, res.total)));
      this.samples = grown;
      this.total = res.total;
    }
    this.samples.set(res.samples, res.start);
    this.loaded = mergeRanges([
      ...this.loaded,
      { start: res.start, end: res.start + res.samples.length },
    ]);
  }
}
