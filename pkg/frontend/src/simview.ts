/**
 * The simulation window: waveform view, motion view, or both, over one
 * finished (or partial) run.  Layout switches and scrubbing are pure
 * client state; they never trigger another request, let alone a re-run.
 */

import { ServiceCallError, ServicePort } from "./client.js";
import { InfoStatsResult } from "./protocol.js";
import { MotionTrace } from "./motion.js";
import { WaveChannel } from "./waveform.js";

export type SimLayout = "waveform-only" | "motion-only" | "full";

export class SimulationView {
  layout: SimLayout = "full";
  /** Playhead in simulation steps, clamped to [0, steps]. */
  playhead = 0;
  steps = 0;
  rate = 0;
  channels = new Map<string, WaveChannel>();
  trace: MotionTrace;
  /** Why the motion pane is disabled, when it is. */
  motionDisabledReason: string | null = null;

  constructor(private client: ServicePort) {
    this.trace = new MotionTrace(client);
  }

  /** Bind to the latest run: discover channels, try to pull the trace. */
  async attachToLastRun(): Promise<boolean> {
    const info = (await this.client.request("info.stats", {})) as InfoStatsResult;
    if (!info.last_run) return false;
    this.steps = info.last_run.steps;
    this.rate = info.last_run.rate;
    this.playhead = Math.min(this.playhead, this.steps);
    this.channels = new Map(
      info.last_run.channels.map((name) => [name, new WaveChannel(this.client, name)]),
    );
    try {
      await this.trace.load();
      this.motionDisabledReason = null;
    } catch (err) {
      if (err instanceof ServiceCallError) {
        this.trace = new MotionTrace(this.client);
        this.motionDisabledReason = err.detail.message;
      } else {
        throw err;
      }
    }
    return true;
  }

  setLayout(layout: SimLayout): void {
    this.layout = layout;
  }

  get waveformVisible(): boolean {
    return this.layout !== "motion-only";
  }

  get motionVisible(): boolean {
    return this.layout !== "waveform-only" && this.trace.loaded;
  }

  /** Move the playhead; both panes key off the same step index. */
  scrub(step: number): void {
    this.playhead = Math.min(Math.max(Math.round(step), 0), this.steps);
  }

  /** Motion frame index the current playhead lands on. */
  currentFrame(): number {
    return this.trace.frameIndexFor(this.playhead);
  }

  /** Seconds at the playhead, for transport readouts. */
  playheadSeconds(): number {
    return this.rate > 0 ? this.playhead / this.rate : 0;
  }
}
