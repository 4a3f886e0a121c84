import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { SessionClient } from "../src/client.js";
import { StdioTransport } from "../src/transport/stdio.js";

export interface LiveSession {
  client: SessionClient;
  transport: StdioTransport;
  /** Scratch directory the service resolves relative paths against. */
  dir: string;
  close(): Promise<void>;
}

/** Spawn a real session service as a child process. */
export function startSession(): LiveSession {
  const dir = mkdtempSync(join(tmpdir(), "workbench-"));
  const transport = new StdioTransport({ cwd: dir });
  const client = new SessionClient(transport);
  return {
    client,
    transport,
    dir,
    async close() {
      try {
        await client.close();
      } finally {
        rmSync(dir, { recursive: true, force: true });
      }
    },
  };
}

export async function until(
  cond: () => boolean,
  what: string,
  timeoutMs = 60_000,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!cond()) {
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${what}`);
    await new Promise((resolve) => setTimeout(resolve, 10));
  }
}

/** Small deterministic PRNG so test inputs are reproducible. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function pick<T>(rng: () => number, items: readonly T[]): T {
  return items[Math.floor(rng() * items.length)];
}
