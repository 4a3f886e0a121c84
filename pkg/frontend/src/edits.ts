/**
 * Optimistic edits: gestures mutate the local mirror immediately, then
 * the same ops go to the service in order.  When the server disagrees
 * (a batch fails halfway, or another writer touched the session) the
 * owner's onStale callback re-fetches server truth, and anything still
 * queued replays on top of it.
 */

import { ServiceCallError, ServicePort } from "./client.js";
import { EditApplyResult, EditOp } from "./protocol.js";

export class EditQueue {
  private chain: Promise<void> = Promise.resolve();
  private inflight = 0;
  /** Last server rejection, kept for the status bar. */
  lastError: ServiceCallError | null = null;

  constructor(
    private client: ServicePort,
    private onStale: () => Promise<void>,
  ) {}

  /** True while any batch is on the wire (events seen now are ours). */
  get busy(): boolean {
    return this.inflight > 0;
  }

  /**
   * Queue one batch.  `optimistic` runs right away so the canvas never
   * waits on the round trip.  Resolves with the server result, or null
   * when the server rejected the batch (state already re-fetched).
   */
  submit(ops: EditOp[], optimistic?: () => void): Promise<EditApplyResult | null> {
    optimistic?.();
    const run = this.chain.then(() => this.send(ops));
    this.chain = run.then(() => undefined);
    return run;
  }

  /** Resolves once every batch queued so far has been settled. */
  drained(): Promise<void> {
    return this.chain;
  }

  private async send(ops: EditOp[]): Promise<EditApplyResult | null> {
    this.inflight++;
    try {
      const result = (await this.client.request("edit.apply", {
        ops: ops as unknown as Record<string, unknown>[],
      })) as EditApplyResult;
      this.lastError = null;
      return result;
    } catch (err) {
      if (err instanceof ServiceCallError) {
        // Ops before error.detail.applied landed; optimistic state is
        // now wrong on both sides of the failure point.  Re-fetch.
        this.lastError = err;
        await this.onStale();
        return null;
      }
      throw err;
    } finally {
      this.inflight--;
    }
  }
}
